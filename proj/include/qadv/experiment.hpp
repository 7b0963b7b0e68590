#pragma once

#include "qadv/analysis.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qadv {

/// Bad configuration value; `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct ExperimentConfig {
    double a = 0.0;
    double b = 1.0;
    int k = 1;
    int theorem = 1;
    std::vector<std::string> families{"composite-trapezoid"};
    std::size_t n_min = 16;
    std::size_t n_max = 4096;
    int steps_per_doubling = 2;
    double tail_fraction = 0.5;
    std::filesystem::path output = "quadv-out";
    bool emit_csv = true;
    bool emit_jsonl = false;
    bool emit_spline = false;
    unsigned threads = 1;
};

/// Applies one `key = value` setting. Keys: interval, k, theorem, families,
/// n, steps, tail_fraction, output, emit.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat key-value text: one `key = value` per line, `#` starts a comment.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});

void validate(const ExperimentConfig& config);

/// Family token -> rule family. Tokens: composite-trapezoid, composite-simpson,
/// composite-simpson38, composite-nc<d>, gauss-legendre, clenshaw-curtis,
/// explicit:<json file>.
RuleFamily make_family(const std::string& token, const Interval& interval);

/// Reads `[{"nodes": [...], "weights": [...], "label": "..."}, ...]`.
std::vector<QuadratureRule> load_explicit_rules(const std::filesystem::path& path, const Interval& interval);

struct SmoothnessSummary {
    std::size_t knots = 0;
    std::size_t continuous_through_k_minus_1 = 0;
    std::size_t jumps_matching_exact = 0;
    std::size_t flagged = 0;
    std::size_t flagged_outside_bad_set = 0;

    bool passed() const noexcept {
        return continuous_through_k_minus_1 == knots && jumps_matching_exact == knots && flagged_outside_bad_set == 0;
    }
};

struct FamilyResult {
    std::string family;
    std::vector<ErrorRecord> records;
    std::optional<OrderFit> fit;
    std::string fit_error;
    BoundCheck bound;
    std::vector<double> bounds;  // per record
    SmoothnessSummary smoothness;
    double max_abs_quad = 0.0;
};

struct RunSummary {
    std::vector<FamilyResult> families;
    bool all_bounds_pass = true;
};

/// Computes everything; no I/O.
RunSummary run_experiment(const ExperimentConfig& config);

SmoothnessSummary summarize_smoothness(const AdversarialSpline& s);

/// Writes the CSV / JSON-lines / spline artifacts and summary.txt.
void write_artifacts(const ExperimentConfig& config, const RunSummary& summary);

/// Human-readable verdict lines, one block per family.
std::string render_summary(const ExperimentConfig& config, const RunSummary& summary);

/// Writes via a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Writes `x,f(x)` samples to `path` and the piece table to `path` + ".pieces".
void dump_spline(const AdversarialSpline& s, const std::filesystem::path& path, std::size_t samples = 2001);

/// Thread cap from QUAD_ADVERSARY_THREADS, else hardware concurrency.
unsigned thread_budget();

}  // namespace qadv
