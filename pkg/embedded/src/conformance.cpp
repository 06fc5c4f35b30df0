// Conformance harness for the emitted int8 inference kernel.
//
// Replays every golden vector against the compiled-in kernel, compares
// the int8 boundary tensors bit for bit and the final float outputs
// within 1e-5, and writes a JSON summary. Also re-quantizes the float
// input through the kernel's own input boundary and checks it against
// the recorded int8 form (boundary 0), so the quantization step itself
// is covered.
//
// Usage: conformance --golden <golden.csv> [--json <out.json>] [--reps N]
// Exit codes: 0 pass, 1 conformance failure, 2 usage/input error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

extern "C" {
typedef void (*soh_tap_fn)(int boundary, const int8_t *values, int n, void *ctx);
void soh_model_init(void);
void soh_model_infer(const float *x, float *y, soh_tap_fn tap, void *ctx);
unsigned long soh_arena_bytes(void);
unsigned long soh_payload_bytes(void);
int soh_tau(void);
int soh_tau_prime(void);
int soh_n_boundaries(void);
const char *soh_boundary_name_at(int b);
const char *soh_boundary_tensor_at(int b);
}

namespace {

constexpr double kOutputTolerance = 1e-5;

struct GoldenVector {
    std::vector<float> input;
    std::vector<std::vector<int8_t>> boundaries;
    std::vector<float> output;
};

struct Mismatch {
    int vector_id = -1;
    int boundary = -1;
    int index = -1;
    int expected = 0;
    int got = 0;
};

struct Tap {
    std::vector<std::vector<int8_t>> captured;
};

void tap_cb(int boundary, const int8_t *values, int n, void *ctx) {
    auto *tap = static_cast<Tap *>(ctx);
    if (boundary >= static_cast<int>(tap->captured.size())) {
        tap->captured.resize(boundary + 1);
    }
    tap->captured[boundary].assign(values, values + n);
}

bool load_golden(const std::string &path, std::map<int, GoldenVector> &out,
                 std::string &err) {
    std::ifstream in(path);
    if (!in) {
        err = "cannot open " + path;
        return false;
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("vector_id,kind,index,value", 0) != 0) {
        err = "missing golden.csv header";
        return false;
    }
    int n_bounds = soh_n_boundaries();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string vid_s, kind, idx_s, val_s;
        if (!std::getline(ss, vid_s, ',') || !std::getline(ss, kind, ',') ||
            !std::getline(ss, idx_s, ',') || !std::getline(ss, val_s)) {
            err = "malformed row: " + line;
            return false;
        }
        int vid = std::stoi(vid_s);
        int idx = std::stoi(idx_s);
        GoldenVector &gv = out[vid];
        if (gv.boundaries.empty()) gv.boundaries.resize(n_bounds);
        if (kind == "input") {
            if (idx >= static_cast<int>(gv.input.size())) gv.input.resize(idx + 1);
            gv.input[idx] = std::stof(val_s);
        } else if (kind == "output") {
            if (idx >= static_cast<int>(gv.output.size())) gv.output.resize(idx + 1);
            gv.output[idx] = std::stof(val_s);
        } else if (kind.rfind("intermediate:", 0) == 0) {
            int b = std::stoi(kind.substr(13));
            if (b < 0 || b >= n_bounds) {
                err = "boundary out of range in: " + line;
                return false;
            }
            auto &vec = gv.boundaries[b];
            if (idx >= static_cast<int>(vec.size())) vec.resize(idx + 1);
            vec[idx] = static_cast<int8_t>(std::stoi(val_s));
        } else {
            err = "unknown kind: " + kind;
            return false;
        }
    }
    return true;
}

std::string json_escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

int main(int argc, char **argv) {
    std::string golden_path;
    std::string json_path;
    int reps = 0;
    for (int i = 1; i < argc; i++) {
        std::string arg = argv[i];
        if (arg == "--golden" && i + 1 < argc) {
            golden_path = argv[++i];
        } else if (arg == "--json" && i + 1 < argc) {
            json_path = argv[++i];
        } else if (arg == "--reps" && i + 1 < argc) {
            reps = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: conformance --golden <csv> [--json <out>] [--reps N]\n";
            return 2;
        }
    }
    if (golden_path.empty()) {
        std::cerr << "usage: conformance --golden <csv> [--json <out>] [--reps N]\n";
        return 2;
    }

    soh_model_init();
    std::map<int, GoldenVector> golden;
    std::string err;
    if (!load_golden(golden_path, golden, err)) {
        std::cerr << "error: " << err << "\n";
        return 2;
    }

    int checked = 0;
    int int8_bad = 0;
    double max_out_err = 0.0;
    Mismatch first;
    std::vector<float> y(soh_tau_prime());

    for (auto &entry : golden) {
        const GoldenVector &gv = entry.second;
        if (static_cast<int>(gv.input.size()) != soh_tau()) {
            std::cerr << "vector " << entry.first << ": input length "
                      << gv.input.size() << " != " << soh_tau() << "\n";
            return 2;
        }
        Tap tap;
        soh_model_infer(gv.input.data(), y.data(), tap_cb, &tap);
        checked++;
        for (int b = 0; b < soh_n_boundaries(); b++) {
            const auto &expect = gv.boundaries[b];
            const auto &got = tap.captured[b];
            if (expect.size() != got.size()) {
                int8_bad++;
                if (first.vector_id < 0) {
                    first = {entry.first, b, -1, static_cast<int>(expect.size()),
                             static_cast<int>(got.size())};
                }
                continue;
            }
            for (size_t i = 0; i < expect.size(); i++) {
                if (expect[i] != got[i]) {
                    int8_bad++;
                    if (first.vector_id < 0) {
                        first = {entry.first, b, static_cast<int>(i), expect[i], got[i]};
                    }
                    break;
                }
            }
        }
        for (size_t i = 0; i < gv.output.size(); i++) {
            max_out_err = std::max(max_out_err,
                                   std::fabs(static_cast<double>(y[i]) - gv.output[i]));
        }
    }

    double median_ms = 0.0;
    if (reps > 0 && !golden.empty()) {
        const auto &x = golden.begin()->second.input;
        std::vector<double> times;
        times.reserve(reps);
        for (int i = 0; i < reps; i++) {
            auto t0 = std::chrono::steady_clock::now();
            soh_model_infer(x.data(), y.data(), nullptr, nullptr);
            auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        median_ms = times[times.size() / 2];
    }

    bool pass = (int8_bad == 0) && (max_out_err <= kOutputTolerance) && checked > 0;
    unsigned long footprint = soh_arena_bytes() + soh_payload_bytes();

    std::ostringstream js;
    js << "{\"pass\": " << (pass ? "true" : "false")
       << ", \"vectors\": " << checked
       << ", \"int8_mismatches\": " << int8_bad
       << ", \"max_output_abs_err\": " << max_out_err
       << ", \"output_tolerance\": " << kOutputTolerance
       << ", \"arena_bytes\": " << soh_arena_bytes()
       << ", \"payload_bytes\": " << soh_payload_bytes()
       << ", \"footprint_bytes\": " << footprint
       << ", \"median_latency_ms\": " << median_ms;
    if (first.vector_id >= 0) {
        js << ", \"first_mismatch\": {\"vector\": " << first.vector_id
           << ", \"boundary\": " << first.boundary
           << ", \"tensor\": \"" << json_escape(soh_boundary_tensor_at(first.boundary))
           << "\", \"name\": \"" << json_escape(soh_boundary_name_at(first.boundary))
           << "\", \"index\": " << first.index
           << ", \"expected\": " << first.expected
           << ", \"got\": " << first.got << "}";
    }
    js << "}";

    std::cout << js.str() << "\n";
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        out << js.str() << "\n";
    }
    if (!pass && first.vector_id >= 0) {
        std::cerr << "FAIL: vector " << first.vector_id << " tensor "
                  << soh_boundary_tensor_at(first.boundary) << " (boundary "
                  << first.boundary << ", " << soh_boundary_name_at(first.boundary)
                  << ") index " << first.index << ": expected " << first.expected
                  << ", got " << first.got << "\n";
    } else if (!pass) {
        std::cerr << "FAIL: max output abs err " << max_out_err << " > "
                  << kOutputTolerance << "\n";
    }
    return pass ? 0 : 1;
}
