#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "bootstrap.hpp"
#include "checks.hpp"
#include "error.hpp"
#include "fisher.hpp"
#include "infotheory.hpp"

namespace bmx {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Everything that determines a run. The hash covers all fields in a fixed order.
struct RunConfig {
    std::string command;
    std::string target;  // model or pair name
    std::map<std::string, double> hyper;
    std::uint64_t seed = 1;
    std::string budget = "default";
    std::map<std::string, std::string> options;
    std::string out_dir;
    std::vector<std::string> formats{"json", "csv", "svg", "txt"};

    std::string canonical() const {
        std::ostringstream o;
        o << command << '|' << target << '|' << seed << '|' << budget;
        for (const auto& [k, v] : hyper) o << '|' << k << '=' << num(v);
        for (const auto& [k, v] : options) o << '|' << k << ':' << v;
        return o.str();
    }
    std::string hash() const { return hex64(fnv1a(canonical())); }
    bool wants(const std::string& f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }

    static std::string num(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
};

inline json meta_json(const RunConfig& c) {
    json hp = json::object();
    for (const auto& [k, v] : c.hyper) hp[k] = v;
    json opt = json::object();
    for (const auto& [k, v] : c.options) opt[k] = v;
    return json{{"config_hash", c.hash()}, {"seed", c.seed},     {"version", kVersion}, {"command", c.command},
                {"target", c.target},      {"hyperparams", hp}, {"budget", c.budget},  {"options", opt}};
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw UsageError("cannot write " + p.string());
    f << content;
}

/// CSV with a leading comment line carrying the run metadata.
class CsvWriter {
public:
    CsvWriter(const RunConfig& c, std::vector<std::string> header) {
        out_ << "# config_hash=" << c.hash() << " seed=" << c.seed << " version=" << kVersion << "\n";
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

// ---------------------------------------------------------------------------
// DataSet CSV: group,obs_index,value with a header row. Ungrouped data leave the group cell empty.

inline std::string dataset_csv(const DataSet& y, const std::string& first_line = {}) {
    std::ostringstream o;
    if (!first_line.empty()) o << first_line << "\n";
    o << "group,obs_index,value\n";
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y.grouped()) o << y.groups[i];
        o << ',' << i << ',' << RunConfig::num(y.values[i]) << "\n";
    }
    return o.str();
}

inline DataSet parse_dataset_csv(std::istream& in, std::string name) {
    DataSet y;
    y.name = std::move(name);
    std::string line;
    bool header = false;
    std::size_t grouped = 0, rows = 0;
    std::vector<std::pair<long, std::pair<int, double>>> rec;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "group,obs_index,value") throw UsageError("dataset CSV: expected header 'group,obs_index,value'");
            header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string g, idx, v;
        if (!std::getline(ls, g, ',') || !std::getline(ls, idx, ',') || !std::getline(ls, v))
            throw UsageError("dataset CSV: malformed row '" + line + "'");
        try {
            int gi = g.empty() ? -1 : std::stoi(g);
            if (!g.empty()) ++grouped;
            ++rows;
            rec.push_back({std::stol(idx), {gi, std::stod(v)}});
        } catch (const std::logic_error&) {
            throw UsageError("dataset CSV: cannot parse row '" + line + "'");
        }
    }
    if (!header) throw UsageError("dataset CSV: missing header row");
    if (grouped != 0 && grouped != rows) throw UsageError("dataset CSV: group labels must be all present or all empty");
    std::stable_sort(rec.begin(), rec.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& r : rec) {
        y.values.push_back(r.second.second);
        if (grouped) y.groups.push_back(r.second.first);
    }
    y.validate();
    return y;
}

inline DataSet read_dataset_csv(const std::filesystem::path& p) {
    std::ifstream f(p);
    if (!f) throw UsageError("cannot read " + p.string());
    return parse_dataset_csv(f, p.stem().string());
}

// ---------------------------------------------------------------------------
// JSON views of results

inline json to_json(const InfoEstimate& e) {
    json cfg = json::object();
    for (const auto& [k, v] : e.config) cfg[k] = v;
    return json{{"quantity", e.quantity}, {"value", e.value},   {"std_error", e.std_error},
                {"method", to_string(e.method)}, {"config", cfg}, {"degenerate", e.degenerate}};
}

inline json to_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        a.push_back(r);
    }
    return a;
}

inline json to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json to_json(const BoundValue& b) {
    return json{{"value", b.value}, {"trace", b.trace}, {"std_error", b.std_error}, {"d", b.d}, {"v_pr", b.v_pr}};
}

inline json to_json(const TraceBound& t) {
    return json{{"delta", t.delta},         {"prior_term", t.prior_term}, {"mixed_sum", t.mixed_sum},
                {"lik_term", t.lik_term},   {"op_norm", t.op_norm},       {"lhs", t.lhs},
                {"lhs_se", t.lhs_se},       {"rhs", t.rhs},               {"rhs_se", t.rhs_se},
                {"delta_sum", t.delta_sum}, {"holds", t.holds},           {"n_mc", t.n_mc}};
}

inline json to_json(const TradeoffReport& t) {
    return json{
        {"pair", t.pair},
        {"dims", {t.d, t.d_exp}},
        {"R", t.R},
        {"scale_factors", {{"base", t.v_pr_base}, {"expanded", t.v_pr_exp}}},
        {"iota", t.iota},
        {"iota_cond", t.iota_cond},
        {"iota_exp", t.iota_exp},
        {"mi_bound_base", t.mi_bound_base},
        {"mi_bound_exp", t.mi_bound_exp},
        {"mi_bound_cond", t.mi_bound_cond},
        {"mi_bound_trace_inequality", t.mi_bound_trace},
        {"cmi_term_base", t.cmi_term_base},
        {"cmi_term_exp", t.cmi_term_exp},
        {"cmi_term_cond", t.cmi_term_cond},
        {"cmi_terms_note", "psi2(x) = x/(1+Rx); universal constants omitted"},
        {"delta_i", t.delta_i},
        {"delta_f", t.delta_f},
        {"delta_naming_note", "delta_i: change in the identifiability bound; delta_f: change in the falsifiability term"},
        {"dilution", to_string(t.dilution.classification)},
        {"dilution_eigenvalues", to_json(t.dilution.eigenvalues)},
        {"trace_bound", to_json(t.trace_bound)},
        {"diluting_inequality", t.diluting_inequality},
        {"nondiluting_inequality", t.nondiluting_inequality},
        {"skew",
         {{"base", {{"var_op", t.skew_base.var_op}, {"lambda_min", t.skew_base.lambda_min_mean}}},
          {"expanded", {{"var_op", t.skew_exp.var_op}, {"lambda_min", t.skew_exp.lambda_min_mean}}}}},
        {"hypotheses",
         {{"log_concave", t.log_concave},
          {"skew_ok_base", t.skew_base.ok},
          {"skew_ok_exp", t.skew_exp.ok},
          {"normal_posterior", "declared"}}},
        {"hypotheses_met", t.hypotheses_met()}};
}

inline json to_json(const CheckResult& r) {
    return json{{"stat", r.stat_name}, {"tail", to_string(r.tail)}, {"t_obs", r.t_obs}, {"marginal_p", r.marginal_p},
                {"n_inner", r.n_inner}, {"seed", r.seed},           {"dropped", r.dropped}};
}

inline json to_json(const SchemeResult& s) {
    return json{{"scheme", to_string(s.scheme)}, {"source", to_string(s.source)}, {"dataset", s.dataset},
                {"rho_bar", s.rho_bar},         {"rho_se", s.rho_se},          {"rho_sd", s.rho_sd},
                {"R", s.R},                     {"added", s.added},            {"S", s.S},
                {"failed", s.failed},           {"seed", s.seed}};
}

// ---------------------------------------------------------------------------
// SVG scatter with a reference line and marginal bar charts

struct SvgScatter {
    std::string title, x_label, y_label = "conditional p";
    std::vector<double> x, y, weight;
    double reference = -1.0;  // horizontal line, skipped when negative
    double y_lo = 0.0, y_hi = 1.0;
    std::string comment;

    std::string render() const {
        const double W = 720, H = 540, left = 70, top = 100, pw = 480, ph = 340, side = 120;
        double x_lo = x.empty() ? 0.0 : *std::min_element(x.begin(), x.end());
        double x_hi = x.empty() ? 1.0 : *std::max_element(x.begin(), x.end());
        if (!(x_hi > x_lo)) x_lo -= 0.5, x_hi += 0.5;
        auto sx = [&](double v) { return left + pw * (v - x_lo) / (x_hi - x_lo); };
        auto sy = [&](double v) { return top + ph * (1.0 - (v - y_lo) / (y_hi - y_lo)); };
        std::ostringstream o;
        o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
        if (!comment.empty()) o << "<!-- " << comment << " -->\n";
        o << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
        o << "<text x=\"" << left << "\" y=\"24\" font-size=\"16\" font-family=\"sans-serif\">" << title << "</text>\n";
        o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
          << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            double xv = x_lo + (x_hi - x_lo) * t / 4.0, yv = y_lo + (y_hi - y_lo) * t / 4.0;
            o << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << top + ph + 18
              << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" << fmt(xv) << "</text>\n";
            o << "<text x=\"" << left - 6 << "\" y=\"" << fmt(sy(yv) + 4)
              << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" << fmt(yv) << "</text>\n";
        }
        o << "<text x=\"" << left + pw / 2 << "\" y=\"" << top + ph + 40
          << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">" << x_label << "</text>\n";
        o << "<text x=\"18\" y=\"" << top + ph / 2 << "\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 18 "
          << top + ph / 2 << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
        for (std::size_t i = 0; i < x.size(); ++i)
            o << "<circle cx=\"" << fmt(sx(x[i])) << "\" cy=\"" << fmt(sy(y[i]))
              << "\" r=\"1.6\" fill=\"steelblue\" fill-opacity=\"0.5\"/>\n";
        if (reference >= y_lo && reference <= y_hi)
            o << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << fmt(sy(reference)) << "\" y2=\""
              << fmt(sy(reference)) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        // Marginal bars: projection on top, p on the right.
        const int bins = 30;
        auto bars = [&](const std::vector<double>& v, double lo, double hi) {
            std::vector<double> h(bins, 0.0);
            for (std::size_t i = 0; i < v.size(); ++i) {
                int b = static_cast<int>(std::floor((v[i] - lo) / (hi - lo) * bins));
                h[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += weight.empty() ? 1.0 : weight[i];
            }
            double mx = *std::max_element(h.begin(), h.end());
            if (mx > 0)
                for (auto& q : h) q /= mx;
            return h;
        };
        auto hx = bars(x, x_lo, x_hi);
        for (int b = 0; b < bins; ++b) {
            double bh = 60.0 * hx[static_cast<std::size_t>(b)];
            o << "<rect x=\"" << fmt(left + pw * b / bins) << "\" y=\"" << fmt(top - 8 - bh) << "\" width=\""
              << fmt(pw / bins - 1) << "\" height=\"" << fmt(bh) << "\" fill=\"gray\"/>\n";
        }
        auto hy = bars(y, y_lo, y_hi);
        for (int b = 0; b < bins; ++b) {
            double bw = (side - 20) * hy[static_cast<std::size_t>(b)];
            double y0 = top + ph * (1.0 - double(b + 1) / bins);
            o << "<rect x=\"" << left + pw + 8 << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(bw) << "\" height=\""
              << fmt(ph / bins - 1) << "\" fill=\"gray\"/>\n";
        }
        o << "</svg>\n";
        return o.str();
    }
};

}  // namespace bmx
