"""Secondary-component acceptance: the emitted bundle compiles under the
C++ harness, all 16 golden vectors pass with bit-exact int8 boundaries
and final error <= 1e-5, and a corrupted weight byte is detected.

The primary suite never needs this; missing toolchain skips it.
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent

pytestmark = pytest.mark.skipif(
    shutil.which("cmake") is None or shutil.which("cc") is None,
    reason="C/C++ toolchain unavailable")


@pytest.fixture(scope="module")
def fresh_bundle(tmp_path_factory):
    """Emit a bundle through the pipeline CLI (smoke-sized deploy)."""
    base = tmp_path_factory.mktemp("secondary")
    out = base / "run"
    doc = json.loads((ROOT / "configs" / "smoke.json").read_text())
    doc["out_dir"] = str(out)
    cfg = base / "cfg.json"
    cfg.write_text(json.dumps(doc))
    proc = subprocess.run([sys.executable, "-m", "sohcast.cli", "all",
                           "--config", str(cfg)],
                          capture_output=True, text=True, cwd=ROOT)
    assert proc.returncode == 0, proc.stderr[-3000:]
    return out / "bundle"


def _build(bundle, build_dir):
    subprocess.run(["cmake", "-S", str(ROOT / "embedded"), "-B", str(build_dir),
                    f"-DSOH_BUNDLE_DIR={bundle}", "-DCMAKE_BUILD_TYPE=Release"],
                   check=True, capture_output=True, text=True)
    subprocess.run(["cmake", "--build", str(build_dir), "--target", "conformance",
                    "-j2"], check=True, capture_output=True, text=True)
    return build_dir / "conformance"


def test_conformance_on_fresh_bundle(fresh_bundle, tmp_path):
    binary = _build(fresh_bundle, tmp_path / "build")
    result_path = tmp_path / "result.json"
    proc = subprocess.run([str(binary), "--golden", str(fresh_bundle / "golden.csv"),
                           "--reps", "64", "--json", str(result_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    result = json.loads(result_path.read_text())
    assert result["pass"] is True
    assert result["vectors"] == 16
    assert result["int8_mismatches"] == 0
    assert result["max_output_abs_err"] <= 1e-5
    assert result["footprint_bytes"] == result["arena_bytes"] + result["payload_bytes"]
    assert result["median_latency_ms"] > 0
    print(f"[PASS] secondary conformance: 16 vectors bit-exact, "
          f"max out err {result['max_output_abs_err']:.2g}, "
          f"footprint {result['footprint_bytes']}B, "
          f"{result['median_latency_ms']:.3f} ms/inference")


def test_fault_injection_detected(fresh_bundle):
    proc = subprocess.run(["bash", str(ROOT / "embedded" / "tests" / "run_tests.sh"),
                           str(fresh_bundle)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "corruption detected" in proc.stdout
    print("[PASS] secondary fault injection: corrupted weight byte detected and named")
