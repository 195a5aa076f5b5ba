#include "rbm/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "rbm/distributional.hpp"
#include "rbm/mse.hpp"
#include "rbm/poisson.hpp"
#include "rbm/transition.hpp"

namespace rbm {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n));
    if (n == 1) {
        out.push_back(lo);
        return out;
    }
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i)
        out.push_back(i + 1 == n ? hi : lo + step * static_cast<double>(i));
    return out;
}

void add_params(Table& t, const RbmParams& p) {
    t.metadata.emplace_back("r", format_sig(p.r));
    t.metadata.emplace_back("sigma2", format_sig(p.sigma2));
    t.metadata.emplace_back("eta", format_sig(p.eta));
    t.metadata.emplace_back("stationary_mean", format_sig(p.stationary_mean));
}

void add_measure(Table& t, const PerformanceMeasure& f) {
    t.metadata.emplace_back("measure", measure_name(f));
    if (const auto* e = std::get_if<Exponential>(&f))
        t.metadata.emplace_back("theta", format_sig(e->theta));
    if (const auto* ind = std::get_if<IndicatorAbove>(&f))
        t.metadata.emplace_back("b", format_sig(ind->b));
}

void add_weight(Table& t, const WeightFunction& w) {
    if (const auto* pw = std::get_if<Power>(&w)) {
        t.metadata.emplace_back("weight", "power");
        t.metadata.emplace_back("p", format_sig(pw->p));
    } else {
        const auto& e = std::get<ExponentialWeight>(w);
        t.metadata.emplace_back("weight", "exponential");
        t.metadata.emplace_back("theta", format_sig(e.theta));
    }
}

void append_goodstate_rows(Table& t, const std::vector<GoodStateRow>& rows) {
    for (const auto& row : rows) {
        if (row.intervals.empty()) {
            t.rows.push_back({format_sig(row.c), "empty", "empty"});
            continue;
        }
        for (const auto& iv : row.intervals)
            t.rows.push_back(
                {format_sig(row.c), format_sig(iv.lo), format_sig(iv.hi)});
    }
}

bool parse_finite(const std::string& cell, double& out) {
    try {
        size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size() || !std::isfinite(v)) return false;
        out = v;
        return true;
    } catch (...) {
        return false;
    }
}

}  // namespace

std::string format_sig(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string to_csv(const Table& t) {
    std::ostringstream out;
    for (const auto& [key, value] : t.metadata)
        out << "# " << key << "=" << value << "\n";
    for (size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    for (const auto& line : t.footers) out << line << "\n";
    return out.str();
}

std::string to_json(const Table& t) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [key, value] : t.metadata) meta[key] = value;
    j["metadata"] = std::move(meta);
    j["columns"] = t.columns;
    j["rows"] = t.rows;
    j["footers"] = t.footers;
    return j.dump(2) + "\n";
}

std::string to_svg(const Table& t, size_t x_column,
                   const std::vector<size_t>& y_columns) {
    struct Pt {
        double x, y;
    };
    std::vector<std::vector<Pt>> series(y_columns.size());
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool any = false;
    for (const auto& row : t.rows) {
        if (x_column >= row.size()) continue;
        double x;
        if (!parse_finite(row[x_column], x)) continue;
        for (size_t s = 0; s < y_columns.size(); ++s) {
            if (y_columns[s] >= row.size()) continue;
            double y;
            if (!parse_finite(row[y_columns[s]], y)) continue;
            if (!any) {
                x_lo = x_hi = x;
                y_lo = y_hi = y;
                any = true;
            }
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
            series[s].push_back({x, y});
        }
    }
    if (x_hi <= x_lo) x_hi = x_lo + 1;
    if (y_hi <= y_lo) y_hi = y_lo + 1;
    const double width = 720, height = 480, margin = 56;
    auto sx = [&](double x) {
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
    };
    auto sy = [&](double y) {
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
    };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << height - margin
        << "\" x2=\"" << width - margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\""
        << margin << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    const std::string x_label =
        x_column < t.columns.size() ? t.columns[x_column] : "x";
    out << "  <text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << x_label << "</text>\n";
    out << "  <text x=\"" << margin << "\" y=\"" << height - margin + 18
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << format_sig(x_lo)
        << "</text>\n";
    out << "  <text x=\"" << width - margin << "\" y=\"" << height - margin + 18
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << format_sig(x_hi) << "</text>\n";
    out << "  <text x=\"" << margin - 6 << "\" y=\"" << height - margin
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << format_sig(y_lo) << "</text>\n";
    out << "  <text x=\"" << margin - 6 << "\" y=\"" << margin + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << format_sig(y_hi) << "</text>\n";
    for (size_t s = 0; s < series.size(); ++s) {
        if (series[s].empty()) continue;
        const char* color = palette[s % 6];
        out << "  <polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& pt : series[s])
            out << sx(pt.x) << "," << sy(pt.y) << " ";
        out << "\"/>\n";
        const std::string label = y_columns[s] < t.columns.size()
                                      ? t.columns[y_columns[s]]
                                      : "series";
        out << "  <text x=\"" << width - margin - 4 << "\" y=\""
            << margin + 16 * static_cast<double>(s + 1)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"12\" fill=\""
            << color << "\">" << label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

Table density_table(const RbmParams& p, const DensityRequest& req) {
    Table t;
    add_params(t, p);
    t.metadata.emplace_back("t", format_sig(req.t));
    t.metadata.emplace_back("x", format_sig(req.x));
    t.columns = {"y", "p_closed", "cdf"};
    if (req.spectral) t.columns.push_back("p_spectral");
    double max_diff = 0.0;
    for (const double y : linspace(0.0, req.ymax, req.n)) {
        const double closed = density(p, req.t, req.x, y);
        std::vector<std::string> row = {format_sig(y), format_sig(closed),
                                        format_sig(cdf(p, req.t, req.x, y))};
        if (req.spectral) {
            const double spectral = density_spectral(p, req.t, req.x, y);
            row.push_back(format_sig(spectral));
            max_diff = std::max(max_diff, std::abs(spectral - closed));
        }
        t.rows.push_back(std::move(row));
    }
    if (req.spectral)
        t.footers.push_back("max_abs_diff=" + format_sig(max_diff));
    return t;
}

Table bias_table(const RbmParams& p, const PerformanceMeasure& f,
                 const BiasRequest& req) {
    Table t;
    add_params(t, p);
    add_measure(t, f);
    t.columns = {"x", "h_c"};
    const BiasFunction bias(p, f);
    for (const double x : linspace(0.0, req.xmax, req.n))
        t.rows.push_back({format_sig(x), format_sig(bias.h_centered(x))});
    t.footers.push_back(
        "cite_pi=" + format_sig(cite_functional(p, f, Stationary{})));
    return t;
}

Table goodstates_functional_table(const RbmParams& p, const PerformanceMeasure& f,
                                  const std::vector<double>& c_grid) {
    Table t;
    add_params(t, p);
    add_measure(t, f);
    t.metadata.emplace_back("set", "functional");
    t.columns = {"c", "lo", "hi"};
    append_goodstate_rows(t, good_states_figure(p, f, c_grid));
    return t;
}

Table goodstates_distributional_table(const RbmParams& p, const WeightFunction& w,
                                      const std::vector<double>& c_grid) {
    Table t;
    add_params(t, p);
    add_weight(t, w);
    t.metadata.emplace_back("set", "distributional");
    t.columns = {"c", "lo", "hi"};
    append_goodstate_rows(t, good_states_distributional_figure(p, w, c_grid));
    return t;
}

Table tolerance_table(const RbmParams& p, const PerformanceMeasure& f,
                      const ToleranceRequest& req) {
    Table t;
    add_params(t, p);
    add_measure(t, f);
    t.metadata.emplace_back("level", format_sig(req.level));
    t.columns = {"x", "eps_star"};
    for (const auto& row :
         tolerance_figure(p, f, linspace(0.0, req.xmax, req.n)))
        t.rows.push_back({format_sig(row.x), format_sig(row.eps_star)});
    const std::vector<Interval> region = tolerance_region(p, f, req.level);
    if (region.empty()) {
        t.footers.push_back("eps_star=" + format_sig(req.level) +
                            " region empty");
    } else {
        t.footers.push_back("eps_star=" + format_sig(req.level) + " at x=" +
                            format_sig(region.back().hi));
    }
    return t;
}

Table mse_table(const RbmParams& p, const PerformanceMeasure& f,
                const std::vector<double>& xs, const std::vector<double>& ts) {
    Table t;
    add_params(t, p);
    add_measure(t, f);
    t.columns = {"x", "t", "kappa2", "k_c", "h_c_sq", "eh_c2", "total"};
    for (const double x : xs) {
        for (const double horizon : ts) {
            const MseDecomposition d = mse_estimate(p, f, x, horizon);
            t.rows.push_back({format_sig(x), format_sig(d.t),
                              format_sig(d.kappa2), format_sig(d.k_c_x),
                              format_sig(d.h_c_sq), format_sig(d.eh_c2),
                              format_sig(d.total)});
        }
    }
    return t;
}

Table simulate_table(const RbmParams& p, const PerformanceMeasure& f, double x0,
                     const SimConfig& cfg) {
    Table t;
    add_params(t, p);
    add_measure(t, f);
    t.metadata.emplace_back("x0", format_sig(x0));
    t.metadata.emplace_back("t", format_sig(cfg.horizon));
    t.metadata.emplace_back("dt", format_sig(cfg.dt));
    t.metadata.emplace_back("replications", std::to_string(cfg.replications));
    t.metadata.emplace_back("seed", std::to_string(cfg.seed));
    t.metadata.emplace_back("antithetic", cfg.antithetic ? "true" : "false");
    t.columns = {"quantity", "analytic", "empirical", "std_error",
                 "ci_lo",    "ci_hi"};

    const TimeAverageEstimate est = estimate_time_average(p, f, x0, cfg);
    const double mean_f = equilibrium_expectation(p, f);
    const double h_c_x0 = h_centered(p, f, x0);
    const double horizon = cfg.horizon;

    t.rows.push_back({"alpha_mean", format_sig(mean_f + h_c_x0 / horizon),
                      format_sig(est.mean), format_sig(est.std_error),
                      format_sig(est.ci_lo), format_sig(est.ci_hi)});
    t.rows.push_back({"bias_constant", format_sig(h_c_x0),
                      format_sig(est.bias_constant),
                      format_sig(horizon * est.std_error),
                      format_sig(horizon * (est.ci_lo - mean_f)),
                      format_sig(horizon * (est.ci_hi - mean_f))});

    const double kap2 = kappa2(p, f);
    // Marginal variance of alpha over all replications; under antithetic the
    // pairing perturbs only the standard error, not this point estimate.
    double raw_var = std::numeric_limits<double>::quiet_NaN();
    if (est.alphas.size() > 1) {
        double ss = 0.0;
        for (const double a : est.alphas) {
            const double d = a - est.mean;
            ss += d * d;
        }
        raw_var = ss / static_cast<double>(est.alphas.size() - 1);
    }
    const size_t units = cfg.antithetic
                             ? (est.alphas.size() + 1) / 2
                             : est.alphas.size();
    const double var_rel_se =
        units > 1 ? std::sqrt(2.0 / static_cast<double>(units - 1)) : 0.0;
    const double tv = horizon * raw_var;
    const double tv_se = tv * var_rel_se;
    t.rows.push_back({"t_times_variance", format_sig(kap2), format_sig(tv),
                      format_sig(tv_se), format_sig(tv - 1.959963984540054 * tv_se),
                      format_sig(tv + 1.959963984540054 * tv_se)});

    const MseDecomposition decomp = mse_estimate(p, f, x0, horizon);
    const MseEstimate emp =
        empirical_mse_from_alphas(est.alphas, mean_f, cfg.antithetic);
    t.rows.push_back({"mse", format_sig(decomp.total), format_sig(emp.mse),
                      format_sig(emp.std_error), format_sig(emp.ci_lo),
                      format_sig(emp.ci_hi)});
    return t;
}

}  // namespace rbm
