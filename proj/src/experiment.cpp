#include "qadv/experiment.hpp"

#include "qadv/format.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace qadv {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, std::string_view seps) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = s.find_first_of(seps, pos);
        const auto piece = trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (!piece.empty()) out.emplace_back(piece);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

long long parse_int(std::string_view field, std::string_view text) {
    text = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ConfigError(std::string(field), "expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

double parse_real(std::string_view field, std::string_view text) {
    try {
        return parse_double(trim(text));
    } catch (const Error&) {
        throw ConfigError(std::string(field), "expected a number, got '" + std::string(trim(text)) + "'");
    }
}

std::size_t parse_size(std::string_view field, std::string_view text) {
    const long long v = parse_int(field, text);
    if (v < 0) throw ConfigError(std::string(field), "must be nonnegative");
    return static_cast<std::size_t>(v);
}

std::string family_label(const std::string& token) {
    if (token.rfind("explicit:", 0) == 0) {
        return "explicit-" + std::filesystem::path(token.substr(9)).stem().string();
    }
    return token;
}

SplineKind kind_for(int theorem) { return theorem == 1 ? SplineKind::Global : SplineKind::Local; }

int expected_order(const ExperimentConfig& c) { return c.theorem == 1 ? c.k : c.k + 1; }

std::string fixed(double x, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << x;
    return os.str();
}

std::string log10_text(double err) {
    if (err == 0.0) return "-inf";
    return format_double(std::log10(err));
}

nlohmann::ordered_json number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    const std::string field(key);
    if (key == "interval") {
        const auto parts = split(value, " ,\t");
        if (parts.size() != 2) throw ConfigError(field, "expected two numbers 'a b'");
        c.a = parse_real(field, parts[0]);
        c.b = parse_real(field, parts[1]);
    } else if (key == "k") {
        c.k = static_cast<int>(parse_int(field, value));
    } else if (key == "theorem") {
        c.theorem = static_cast<int>(parse_int(field, value));
    } else if (key == "families" || key == "family") {
        c.families = split(value, ", \t");
    } else if (key == "n") {
        const auto dots = value.find("..");
        if (dots == std::string_view::npos) {
            c.n_min = c.n_max = parse_size(field, value);
        } else {
            c.n_min = parse_size(field, value.substr(0, dots));
            c.n_max = parse_size(field, value.substr(dots + 2));
        }
    } else if (key == "n_min") {
        c.n_min = parse_size(field, value);
    } else if (key == "n_max") {
        c.n_max = parse_size(field, value);
    } else if (key == "steps") {
        c.steps_per_doubling = static_cast<int>(parse_int(field, value));
    } else if (key == "tail_fraction") {
        c.tail_fraction = parse_real(field, value);
    } else if (key == "output") {
        if (value.empty()) throw ConfigError(field, "must not be empty");
        c.output = std::string(value);
    } else if (key == "emit") {
        c.emit_csv = c.emit_jsonl = c.emit_spline = false;
        for (const auto& e : split(value, ", \t")) {
            if (e == "csv") {
                c.emit_csv = true;
            } else if (e == "jsonl" || e == "json-lines") {
                c.emit_jsonl = true;
            } else if (e == "spline") {
                c.emit_spline = true;
            } else if (e != "none") {
                throw ConfigError(field, "unknown output kind '" + e + "' (csv, jsonl, spline, none)");
            }
        }
    } else {
        throw ConfigError(field, "unknown key");
    }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
        }
        apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

void validate(const ExperimentConfig& c) {
    if (!std::isfinite(c.a) || !std::isfinite(c.b) || !(c.a < c.b)) {
        throw ConfigError("interval", "need finite a < b");
    }
    if (c.k < 1 || c.k > SmoothnessOrder::kMax) {
        throw ConfigError("k", "must be in 1.." + std::to_string(SmoothnessOrder::kMax));
    }
    if (c.theorem != 1 && c.theorem != 2) throw ConfigError("theorem", "must be 1 or 2");
    if (c.n_min < 1) throw ConfigError("n", "n_min must be at least 1");
    if (!(c.n_min < c.n_max)) throw ConfigError("n", "n_min must be less than n_max");
    if (c.steps_per_doubling < 1) throw ConfigError("steps", "must be at least 1");
    if (!(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0)) throw ConfigError("tail_fraction", "must be in (0,1]");
    if (c.families.empty()) throw ConfigError("families", "at least one family is required");
    std::set<std::string> seen;
    const Interval iv(c.a, c.b);
    for (const auto& f : c.families) {
        if (!seen.insert(family_label(f)).second) throw ConfigError("families", "duplicate family '" + f + "'");
        RuleFamily fam = [&] {
            try {
                return make_family(f, iv);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError("families", f + ": " + e.what());
            }
        }();
        if (f == "gauss-legendre" && c.n_max > 8192) throw ConfigError("n", "gauss-legendre supports at most 8192 nodes");
        try {
            (void)fam.generate(c.n_min);
            if (fam.name() == "explicit") (void)fam.generate(c.n_max);
        } catch (const Error& e) {
            throw ConfigError("n", f + ": " + e.what());
        }
    }
}

std::vector<QuadratureRule> load_explicit_rules(const std::filesystem::path& path, const Interval& iv) {
    std::ifstream in(path);
    if (!in) throw ConfigError("families", "cannot read explicit rule file '" + path.string() + "'");
    std::vector<QuadratureRule> rules;
    try {
        const auto doc = nlohmann::json::parse(in);
        if (!doc.is_array()) throw ConfigError("families", path.string() + ": expected a JSON array of rules");
        for (const auto& r : doc) {
            auto nodes = r.at("nodes").get<std::vector<double>>();
            auto weights = r.at("weights").get<std::vector<double>>();
            std::string label = r.value("label", "explicit-" + std::to_string(nodes.size()));
            rules.emplace_back(iv, std::move(nodes), std::move(weights), std::move(label), r.value("exactness", -1));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("families", path.string() + ": " + e.what());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("families", path.string() + ": " + e.what());
    }
    return rules;
}

RuleFamily make_family(const std::string& token, const Interval& iv) {
    if (token == "composite-trapezoid") return RuleFamily::composite_newton_cotes(1, iv);
    if (token == "composite-simpson") return RuleFamily::composite_newton_cotes(2, iv);
    if (token == "composite-simpson38") return RuleFamily::composite_newton_cotes(3, iv);
    if (token == "gauss-legendre") return RuleFamily::gauss_legendre(iv);
    if (token == "clenshaw-curtis") return RuleFamily::clenshaw_curtis(iv);
    if (token.rfind("composite-nc", 0) == 0) {
        const std::string digits = token.substr(12);
        int d = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
        if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || d < 1 || d > 8) {
            throw ConfigError("families", "'" + token + "': composite-nc needs a degree 1..8");
        }
        return RuleFamily::composite_newton_cotes(d, iv);
    }
    if (token.rfind("explicit:", 0) == 0) return RuleFamily::explicit_rules(load_explicit_rules(token.substr(9), iv));
    throw ConfigError("families", "unknown family '" + token + "'");
}

SmoothnessSummary summarize_smoothness(const AdversarialSpline& s) {
    const auto fractions = default_step_fractions();
    const double kf = factorial(s.k());
    SmoothnessSummary out;
    for (const auto& r : verify_smoothness(s, s.k(), fractions)) {
        ++out.knots;
        if (r.max_matched_order >= s.k() - 1) ++out.continuous_through_k_minus_1;
        if (std::abs(r.jump_at_k - r.exact_jump_at_k) <= 1e-6 * kf) ++out.jumps_matching_exact;
        if (r.is_bad) {
            ++out.flagged;
            if (!r.in_bad_set) ++out.flagged_outside_bad_set;
        }
    }
    return out;
}

RunSummary run_experiment(const ExperimentConfig& c) {
    validate(c);
    const Interval iv(c.a, c.b);
    const SmoothnessOrder k(c.k);
    const SplineKind kind = kind_for(c.theorem);
    const auto sizes = geometric_sizes(c.n_min, c.n_max, c.steps_per_doubling);

    RunSummary summary;
    for (const auto& token : c.families) {
        FamilyResult fr;
        fr.family = family_label(token);
        const RuleFamily fam = make_family(token, iv);
        fr.records = error_sequence(fam, k, kind, sizes, std::max(1u, c.threads));
        try {
            fr.fit = fit_order(fr.records, c.tail_fraction, underflow_floor(k, iv));
        } catch (const InsufficientData& e) {
            fr.fit_error = e.what();
        }
        fr.bound = c.theorem == 1 ? theorem1_bound_check(fr.records, k, iv) : theorem2_bound_check(fr.records, k, iv);
        for (const auto& r : fr.records) {
            fr.bounds.push_back(c.theorem == 1 ? theorem1_lower_bound(r.node_count, r.first_node, r.last_node, k, iv)
                                               : theorem2_lower_bound(r.node_count, k, iv));
            fr.max_abs_quad = std::max(fr.max_abs_quad, std::abs(r.quad_value));
        }
        const auto largest = fam.generate(sizes.back());
        fr.smoothness = summarize_smoothness(adversary_for(largest, k, kind));
        summary.all_bounds_pass = summary.all_bounds_pass && fr.bound.passed;
        summary.families.push_back(std::move(fr));
    }
    return summary;
}

std::string render_summary(const ExperimentConfig& c, const RunSummary& summary) {
    std::ostringstream os;
    os << "theorem " << c.theorem << ", k=" << c.k << ", interval [" << format_double(c.a) << ", "
       << format_double(c.b) << "], n " << c.n_min << ".." << c.n_max << "\n";
    for (const auto& f : summary.families) {
        os << f.family << "\n";
        if (f.fit) {
            os << "  fitted order " << fixed(f.fit->order(), 2) << " (expected ≤ " << expected_order(c)
               << ")  slope " << format_double(f.fit->slope) << "  r² " << fixed(f.fit->r_squared, 6)
               << "  over n " << f.fit->n_range.first << ".." << f.fit->n_range.second << " (" << f.fit->points
               << " points)\n";
        } else {
            os << "  fitted order n/a: " << f.fit_error << "\n";
        }
        os << "  bound check: " << (f.bound.passed ? "pass" : "FAIL") << " (worst margin "
           << format_double(f.bound.worst_margin) << ")\n";
        const auto& s = f.smoothness;
        os << "  smoothness at n=" << f.records.back().node_count << ": C^" << c.k - 1 << " matched at "
           << s.continuous_through_k_minus_1 << "/" << s.knots << " knots; order-" << c.k
           << " jumps match closed form at " << s.jumps_matching_exact << "/" << s.knots << "; flagged "
           << s.flagged << ", outside bad set " << s.flagged_outside_bad_set << "\n";
    }
    os << "verdict: " << (summary.all_bounds_pass ? "all bound checks pass" : "bound check failed") << "\n";
    return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("write " + path.string() + ": cannot open for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error("write " + path.string() + ": write failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("write " + path.string() + ": " + ec.message());
    }
}

void dump_spline(const AdversarialSpline& s, const std::filesystem::path& path, std::size_t samples) {
    if (samples < 2) throw DomainError("dump_spline: need at least 2 samples");
    const double a = s.interval().a();
    const double b = s.interval().b();
    std::ostringstream os;
    os << "x,f\n";
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = i + 1 == samples ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(samples - 1);
        os << format_double(x) << "," << format_double(s(x)) << "\n";
    }
    std::ostringstream pieces;
    write_spline(pieces, s);
    write_file_atomic(path, os.str());
    auto ppath = path;
    ppath += ".pieces";
    write_file_atomic(ppath, pieces.str());
}

void write_artifacts(const ExperimentConfig& c, const RunSummary& summary) {
    std::error_code ec;
    std::filesystem::create_directories(c.output, ec);
    if (ec) throw Error("create output directory " + c.output.string() + ": " + ec.message());

    const Interval iv(c.a, c.b);
    const SmoothnessOrder k(c.k);
    std::ostringstream records_jsonl;
    std::ostringstream summary_jsonl;
    std::ostringstream bounds_table;
    for (std::size_t fi = 0; fi < summary.families.size(); ++fi) {
        const auto& f = summary.families[fi];
        if (c.emit_csv) {
            std::ostringstream csv;
            csv << "family,n,quad_value,exact_value,abs_error,log10_error\n";
            for (const auto& r : f.records) {
                csv << f.family << "," << r.node_count << "," << format_double(r.quad_value) << ","
                    << format_double(r.exact_value) << "," << format_double(r.abs_error) << ","
                    << log10_text(r.abs_error) << "\n";
            }
            write_file_atomic(c.output / (f.family + ".csv"), csv.str());
        }
        bounds_table << "bound checks for " << f.family << "\n";
        bounds_table << "  n,abs_error,bound,margin,result\n";
        for (std::size_t i = 0; i < f.records.size(); ++i) {
            const auto& r = f.records[i];
            const double margin = f.bound.margins.at(i);
            bounds_table << "  " << r.node_count << "," << format_double(r.abs_error) << ","
                         << format_double(f.bounds[i]) << "," << format_double(margin) << ","
                         << (margin >= -1e-12 ? "pass" : "fail") << "\n";
            if (c.emit_jsonl) {
                nlohmann::ordered_json j;
                j["family"] = f.family;
                j["n"] = r.node_count;
                j["rule"] = r.rule_label;
                j["quad_value"] = number(r.quad_value);
                j["exact_value"] = number(r.exact_value);
                j["abs_error"] = number(r.abs_error);
                j["log10_error"] = r.abs_error > 0.0 ? number(std::log10(r.abs_error)) : nullptr;
                j["bound"] = number(f.bounds[i]);
                j["margin"] = number(margin);
                records_jsonl << j.dump() << "\n";
            }
        }
        if (c.emit_jsonl) {
            nlohmann::ordered_json j;
            j["family"] = f.family;
            j["theorem"] = c.theorem;
            j["k"] = c.k;
            if (f.fit) {
                j["slope"] = number(f.fit->slope);
                j["intercept"] = number(f.fit->intercept);
                j["r_squared"] = number(f.fit->r_squared);
                j["fit_n_range"] = {f.fit->n_range.first, f.fit->n_range.second};
                j["fit_points"] = f.fit->points;
            } else {
                j["slope"] = nullptr;
                j["fit_error"] = f.fit_error;
            }
            j["expected_order_at_most"] = expected_order(c);
            j["bound_passed"] = f.bound.passed;
            j["worst_margin"] = number(f.bound.worst_margin);
            auto& sm = j["smoothness"];
            sm["knots"] = f.smoothness.knots;
            sm["continuous_through_k_minus_1"] = f.smoothness.continuous_through_k_minus_1;
            sm["jumps_matching_exact"] = f.smoothness.jumps_matching_exact;
            sm["flagged"] = f.smoothness.flagged;
            sm["flagged_outside_bad_set"] = f.smoothness.flagged_outside_bad_set;
            summary_jsonl << j.dump() << "\n";
        }
        if (c.emit_spline) {
            const auto fam = make_family(c.families[fi], iv);
            const auto rule = fam.generate(f.records.back().node_count);
            dump_spline(adversary_for(rule, k, kind_for(c.theorem)), c.output / (f.family + "-spline.csv"));
        }
    }
    write_file_atomic(c.output / "summary.txt", render_summary(c, summary) + "\n" + bounds_table.str());
    if (c.emit_jsonl) {
        write_file_atomic(c.output / "records.jsonl", records_jsonl.str());
        write_file_atomic(c.output / "summary.jsonl", summary_jsonl.str());
    }
}

unsigned thread_budget() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QUAD_ADVERSARY_THREADS")) {
        unsigned v = 0;
        const std::string_view s(env);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v >= 1) return std::min(v, hw);
    }
    return hw;
}

}  // namespace qadv
