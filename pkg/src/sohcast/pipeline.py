"""End-to-end orchestration: teacher, two distillation stages, deployment.

Artifacts land under the configured output directory:

    checkpoints/teacher.dlnt, checkpoints/stage{1,2}/<id>.dlnt
    checkpoints/deploy/<id>.int8.dlnt
    ledger/stage1.csv, ledger/stage2.csv, ledger/deploy.csv
    front_stage1.csv, front_stage2.csv, report.md
    bundle/soh_model_data.h, bundle/soh_model_kernel.c, bundle/golden.csv
    state.json (record store; reports regenerate from it alone)

Every stochastic choice is seeded per student id, so results do not
depend on worker-pool scheduling; ledgers, checkpoints and bundles are
byte-identical across reruns (wall_ms column aside).
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import logging
import os
import time
from pathlib import Path

import numpy as np

from . import checkpoint, reporting
from .compression import PruneMask, prune_variants
from .config import PipelineConfig
from .data import load_soh_csv, split_by_health, stack_windows, synth_degradation
from .distillation import (DistillConfig, DistillKind, StudentRecord, generate_pool,
                           train_student, train_teacher)
from .errors import ConfigError, PipelineError
from .models import StudentModel, TeacherModel
from .quantization import (calibrate, emit_embedded_source, make_golden_vectors,
                           quantize_int8)
from .rng import make_rng, split_seed
from .selection import (CostVector, ErrorVector, eval_costs, eval_errors,
                        filter_thresholds, normalize_pool, pareto_front)

log = logging.getLogger("sohcast")

_WORKER_CTX: dict = {}


def _record_to_dict(r: StudentRecord) -> dict:
    d = dataclasses.asdict(r)
    d["error_vector"] = dataclasses.asdict(r.error_vector) if r.error_vector else None
    d["cost_vector"] = dataclasses.asdict(r.cost_vector) if r.cost_vector else None
    return d


def _record_from_dict(d: dict) -> StudentRecord:
    d = dict(d)
    ev, cv = d.pop("error_vector"), d.pop("cost_vector")
    rec = StudentRecord(**d)
    rec.error_vector = ErrorVector(**ev) if ev else None
    rec.cost_vector = CostVector(**cv) if cv else None
    return rec


def _init_worker(teacher_blob, X, Y):
    _WORKER_CTX["teacher"] = checkpoint.deserialize_model(teacher_blob)[0]
    _WORKER_CTX["windows"] = _arrays_to_windows(X, Y)


def _arrays_to_windows(X, Y):
    from .models import ForecastWindow

    return [ForecastWindow(x=X[i], y=Y[i]) for i in range(len(X))]


def _train_job(payload):
    """Worker-side distillation of one student; returns (record, blob)."""
    teacher = _WORKER_CTX["teacher"]
    windows = _WORKER_CTX["windows"]
    model, mask = checkpoint.deserialize_model(payload["model_blob"])
    cfg = DistillConfig(distill_kind=DistillKind(payload["kind"]), **payload["cfg"])
    record = train_student(teacher, model, windows, cfg, seed=payload["seed"],
                           record_id=payload["id"], mask=mask,
                           stage=payload["stage"], sparsity=payload["sparsity"])
    return record, checkpoint.serialize_model(model, mask)


class Pipeline:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = Path(cfg.out_dir)
        for sub in ("checkpoints/stage1", "checkpoints/stage2", "checkpoints/deploy",
                    "ledger", "bundle"):
            (self.out / sub).mkdir(parents=True, exist_ok=True)
        self.state_path = self.out / "state.json"
        self.state = self._load_state()

    # -- state ----------------------------------------------------------------

    def _load_state(self) -> dict:
        if self.state_path.exists():
            return json.loads(self.state_path.read_text())
        return {"records": {}, "fronts": {}, "teacher": None, "deployed": None}

    def _save_state(self) -> None:
        self.state_path.write_text(json.dumps(self.state, sort_keys=True, indent=1))

    def _store_records(self, stage_key: str, records: list[StudentRecord]) -> None:
        self.state["records"][stage_key] = [_record_to_dict(r) for r in records]

    def _stage_records(self, stage_key: str) -> list[StudentRecord]:
        return [_record_from_dict(d) for d in self.state["records"].get(stage_key, [])]

    # -- data -----------------------------------------------------------------

    def dataset(self):
        d = self.cfg.data
        if d.source == "csv":
            series = load_soh_csv(d.csv_path)
        else:
            series = synth_degradation(d.synth.n_cells, d.synth.n_cycles,
                                       d.synth.params(), seed=self.cfg.seed)
        return split_by_health(series, d.test_fraction, seed=self.cfg.seed,
                               window=d.window, horizon=d.horizon,
                               train_stride=d.train_stride, test_stride=d.test_stride)

    # -- teacher ----------------------------------------------------------------

    @property
    def teacher_path(self) -> Path:
        return self.out / "checkpoints" / "teacher.dlnt"

    def ensure_teacher(self, split=None) -> TeacherModel:
        if self.teacher_path.exists():
            return checkpoint.deserialize_model(checkpoint.load(self.teacher_path))[0]
        return self.run_train_teacher(split)

    def run_train_teacher(self, split=None) -> TeacherModel:
        cfg = self.cfg
        split = split or self.dataset()
        t0 = time.perf_counter()
        teacher = TeacherModel(cfg.data.window, cfg.data.horizon,
                               hidden_dim=cfg.teacher.hidden_dim, t_end=cfg.teacher.t_end,
                               steps=cfg.teacher.steps, dropout_p=cfg.teacher.dropout_p,
                               seed=split_seed(cfg.seed, "teacher"))
        log.info("training teacher d=%d on %d windows for %d epochs",
                 cfg.teacher.hidden_dim, len(split.train), cfg.teacher.epochs)
        train_teacher(teacher, split.train, cfg.teacher.epochs, cfg.teacher.lr,
                      cfg.teacher.batch_size, seed=split_seed(cfg.seed, "teacher"),
                      lr_min_factor=cfg.teacher.lr_min_factor)
        checkpoint.save(self.teacher_path, checkpoint.serialize_model(teacher))
        log.info("teacher trained in %.1fs -> %s", time.perf_counter() - t0, self.teacher_path)
        return teacher

    # -- shared evaluation ------------------------------------------------------

    def _evaluate(self, record: StudentRecord, model, mask, split) -> None:
        sel = self.cfg.selection
        record.error_vector = eval_errors(model, split.test, runs=sel.eval_runs,
                                          seed=self.cfg.seed, record_id=record.id)
        record.cost_vector = eval_costs(model, timing_reps=sel.timing_reps, mask=mask,
                                        kappa_e=sel.kappa_e, kappa_c=sel.kappa_c,
                                        kappa_t=sel.kappa_t,
                                        sample_window=split.test[0].x)

    def _teacher_record(self, teacher, split, stage: int) -> StudentRecord:
        rec = StudentRecord(id="teacher", hidden_dim=teacher.hidden_dim, distill_kind="",
                            sparsity=0.0, stage=stage, params=teacher.count_params(),
                            flops=teacher.count_flops())
        self._evaluate(rec, teacher, None, split)
        return rec

    def _run_pool(self, jobs, teacher, split):
        """Train many students; returns [(record, blob)] in job order."""
        if self.cfg.workers > 1:
            X, Y = stack_windows(split.train)
            blob = checkpoint.serialize_model(teacher)
            with concurrent.futures.ProcessPoolExecutor(
                    max_workers=self.cfg.workers, initializer=_init_worker,
                    initargs=(blob, X, Y)) as pool:
                return list(pool.map(_train_job, jobs))
        _init_worker(checkpoint.serialize_model(teacher), *stack_windows(split.train))
        return [_train_job(j) for j in jobs]

    def _select(self, records: list[StudentRecord], stage_key: str) -> list[StudentRecord]:
        weights = self.cfg.selection.weights()
        normalize_pool(records, weights)
        survivors = filter_thresholds(records, weights, log=log)
        front = pareto_front(survivors)
        front_ids = {r.id for r in front}
        for r in records:
            r.pareto = r.id in front_ids
        self.state["fronts"][stage_key] = sorted(front_ids)
        log.info("%s front: %s", stage_key, sorted(front_ids))
        return [r for r in records if r.pareto]

    # -- stage 1 -----------------------------------------------------------------

    def run_stage1(self) -> list[StudentRecord]:
        cfg = self.cfg
        split = self.dataset()
        teacher = self.ensure_teacher(split)
        t0 = time.perf_counter()
        pool = generate_pool(cfg.students.dims, [DistillKind.MSE, DistillKind.COSINE],
                             cfg.seed, window=cfg.data.window, horizon=cfg.data.horizon,
                             rank=cfg.students.rank, euler_steps=cfg.students.euler_steps,
                             t_end=cfg.teacher.t_end, dropout_p=cfg.students.dropout_p,
                             alpha_init=float(teacher.alpha.data),
                             beta_init=float(teacher.beta.data))
        dcfg = dict(lambda_init=cfg.distill.lambda_init, lambda_step=cfg.distill.lambda_step,
                    lambda_max=cfg.distill.lambda_max, epochs=cfg.students.epochs,
                    lr=cfg.students.lr, batch_size=cfg.students.batch_size,
                    lr_min_factor=cfg.students.lr_min_factor)
        jobs = [dict(id=e.id, kind=e.kind.value, cfg=dcfg, stage=1, sparsity=0.0,
                     seed=split_seed(cfg.seed, "stage1", e.id),
                     model_blob=checkpoint.serialize_model(e.model)) for e in pool]
        results = self._run_pool(jobs, teacher, split)
        records = []
        for (record, blob) in results:
            path = self.out / "checkpoints" / "stage1" / f"{record.id}.dlnt"
            checkpoint.save(path, blob)
            record.checkpoint = str(path.relative_to(self.out))
            if record.status == "trained":
                model, _ = checkpoint.deserialize_model(blob)
                self._evaluate(record, model, None, split)
            records.append(record)
        if all(r.status == "failed" for r in records):
            raise PipelineError("every stage-1 student failed: "
                                + "; ".join(f"{r.id}: {r.diagnostic}" for r in records))
        elites = self._select(records, "stage1")
        self.state["teacher"] = _record_to_dict(self._teacher_record(teacher, split, 1))
        self._store_records("stage1", records)
        self._save_state()
        self._write_reports()
        log.info("stage1 finished in %.1fs (%d students, %d elites)",
                 time.perf_counter() - t0, len(records), len(elites))
        return elites

    # -- stage 2 -----------------------------------------------------------------

    def run_stage2(self) -> list[StudentRecord]:
        cfg = self.cfg
        front_ids = self.state["fronts"].get("stage1")
        if not front_ids:
            raise PipelineError("stage2 requires stage-1 elites; run stage1 first")
        split = self.dataset()
        teacher = self.ensure_teacher(split)
        t0 = time.perf_counter()
        jobs = []
        dcfg = dict(lambda_init=cfg.distill.lambda_init, lambda_step=cfg.distill.lambda_step,
                    lambda_max=cfg.distill.lambda_max, epochs=cfg.students.epochs,
                    lr=cfg.students.lr, batch_size=cfg.students.batch_size,
                    lr_min_factor=cfg.students.lr_min_factor)
        for elite_id in front_ids:
            blob = checkpoint.load(self.out / "checkpoints" / "stage1" / f"{elite_id}.dlnt")
            elite, _ = checkpoint.deserialize_model(blob)
            for s, pruned, mask in prune_variants(elite, cfg.prune.sparsities):
                for kind in (DistillKind.MSE, DistillKind.COSINE):
                    sid = f"{elite_id}-p{s:g}-{kind.code}"
                    jobs.append(dict(id=sid, kind=kind.value, cfg=dcfg, stage=2,
                                     sparsity=s, seed=split_seed(cfg.seed, "stage2", sid),
                                     model_blob=checkpoint.serialize_model(pruned, mask)))
        results = self._run_pool(jobs, teacher, split)
        records = []
        for (record, blob) in results:
            path = self.out / "checkpoints" / "stage2" / f"{record.id}.dlnt"
            checkpoint.save(path, blob)
            record.checkpoint = str(path.relative_to(self.out))
            if record.status == "trained":
                model, mask = checkpoint.deserialize_model(blob)
                self._evaluate(record, model, mask, split)
            records.append(record)
        if all(r.status == "failed" for r in records):
            raise PipelineError("every stage-2 student failed: "
                                + "; ".join(f"{r.id}: {r.diagnostic}" for r in records))
        front = self._select(records, "stage2")
        self._store_records("stage2", records)
        self._save_state()
        self._write_reports()
        log.info("stage2 finished in %.1fs (%d candidates, front %d)",
                 time.perf_counter() - t0, len(records), len(front))
        return front

    # -- deploy ------------------------------------------------------------------

    def default_deploy_choice(self) -> str:
        """Accuracy-first pick: the front member with the lowest
        deterministic MAE (ties by error utility, then id)."""
        front_ids = self.state["fronts"].get("stage2") or []
        records = {r.id: r for r in self._stage_records("stage2")}
        candidates = [records[i] for i in front_ids if i in records]
        if not candidates:
            raise PipelineError("deploy requires a nonempty stage-2 front")
        best = min(candidates, key=lambda r: (r.error_vector.mae, r.f_err, r.id))
        return best.id

    def run_deploy(self, student_id: str | None = None) -> StudentRecord:
        cfg = self.cfg
        front_ids = self.state["fronts"].get("stage2") or []
        if not front_ids:
            raise PipelineError("deploy requires a nonempty stage-2 front; run stage2 first")
        student_id = student_id or self.default_deploy_choice()
        if student_id not in front_ids:
            raise ConfigError(f"student {student_id!r} is not in the final front {front_ids}")
        split = self.dataset()
        t0 = time.perf_counter()
        blob = checkpoint.load(self.out / "checkpoints" / "stage2" / f"{student_id}.dlnt")
        model, mask = checkpoint.deserialize_model(blob)
        base = {r.id: r for r in self._stage_records("stage2")}[student_id]

        rng = make_rng(cfg.seed, "calib")
        n_calib = min(cfg.quant.calib_windows, len(split.train))
        calib_idx = rng.choice(len(split.train), size=n_calib, replace=False)
        calib = [split.train[int(i)] for i in calib_idx]
        ranges = calibrate(model, calib)
        qm = quantize_int8(model, ranges, sparsity=base.sparsity)

        record = StudentRecord(id=f"{student_id}-int8", hidden_dim=model.hidden_dim,
                               distill_kind=base.distill_kind, sparsity=base.sparsity,
                               stage=3, params=model.count_params(), flops=0)
        self._evaluate(record, qm, None, split)
        record.flops = record.cost_vector.flops
        qpath = self.out / "checkpoints" / "deploy" / f"{student_id}.int8.dlnt"
        checkpoint.save(qpath, checkpoint.serialize_quantized(qm))
        record.checkpoint = str(qpath.relative_to(self.out))

        gv = make_golden_vectors(qm, split.train, cfg.quant.golden_count,
                                 seed=split_seed(cfg.seed, "golden", cfg.quant.golden_seed))
        bundle = emit_embedded_source(qm, gv)
        for name, text in bundle.items():
            (self.out / "bundle" / name).write_text(text)
        self.state["deployed"] = student_id
        self._store_records("deploy", [record])
        self._save_state()
        self._write_reports()
        log.info("deployed %s in %.1fs: payload %d bytes, bundle -> %s",
                 student_id, time.perf_counter() - t0,
                 int(record.cost_vector.model_size_bytes), self.out / "bundle")
        return record

    # -- reports -------------------------------------------------------------------

    def _write_reports(self) -> None:
        stages = {}
        teacher_rec = [_record_from_dict(self.state["teacher"])] if self.state["teacher"] else []
        for key, title in (("stage1", "Stage 1: distilled students"),
                           ("stage2", "Stage 2: pruned + re-distilled students"),
                           ("deploy", "Deployed int8 artifact")):
            records = self._stage_records(key)
            if not records:
                continue
            (self.out / "ledger" / f"{key}.csv").write_text(
                reporting.ledger_csv(teacher_rec + records if key != "deploy" else records))
            if key in ("stage1", "stage2"):
                (self.out / f"front_{key}.csv").write_text(
                    reporting.front_scatter_csv(records))
            stages[title] = teacher_rec + records
        if stages:
            (self.out / "report.md").write_text(reporting.markdown_report(stages))

    def run_report(self) -> None:
        if not self.state["records"]:
            raise ConfigError(f"no ledger state under {self.out}; run a stage first")
        self._write_reports()

    # -- full run --------------------------------------------------------------------

    def run_all(self, student_id: str | None = None) -> StudentRecord:
        self.run_stage1()
        self.run_stage2()
        return self.run_deploy(student_id)
