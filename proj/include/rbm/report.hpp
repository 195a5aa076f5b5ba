#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rbm/model.hpp"
#include "rbm/montecarlo.hpp"

namespace rbm {

// Emitter-agnostic result table. Cells are pre-formatted strings so every
// output format renders the same digits and runs are byte-reproducible.
struct Table {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> footers;  // verbatim lines after the data
};

// 12 significant digits, '.' decimal separator; inf/nan spelled out.
std::string format_sig(double v);

// CSV: '# key=value' metadata lines, header row, data rows, footer lines.
std::string to_csv(const Table& t);

// JSON mirror of the table; cells stay strings so emit/parse round-trips.
std::string to_json(const Table& t);

// Minimal self-contained line chart of y_columns against x_column; cells that
// do not parse as finite numbers are skipped.
std::string to_svg(const Table& t, size_t x_column,
                   const std::vector<size_t>& y_columns);

struct DensityRequest {
    double t;
    double x;
    double ymax;
    int n;
    bool spectral = false;
};

// Columns y, p_closed, cdf (+ p_spectral with a max_abs_diff footer).
Table density_table(const RbmParams& p, const DensityRequest& req);

struct BiasRequest {
    double xmax;
    int n;
};

// Columns x, h_c; footer 'cite_pi=<value>' (the stationary-start benchmark).
Table bias_table(const RbmParams& p, const PerformanceMeasure& f,
                 const BiasRequest& req);

// Columns c, lo, hi; one row per interval, 'empty' cells when the set is
// empty at that c.
Table goodstates_functional_table(const RbmParams& p, const PerformanceMeasure& f,
                                  const std::vector<double>& c_grid);
Table goodstates_distributional_table(const RbmParams& p, const WeightFunction& w,
                                      const std::vector<double>& c_grid);

struct ToleranceRequest {
    double xmax;
    int n;
    double level = 0.1;
};

// Columns x, eps_star ('inf' rows mark bias zeros); footer locates the level
// crossing.
Table tolerance_table(const RbmParams& p, const PerformanceMeasure& f,
                      const ToleranceRequest& req);

// Columns x, t, kappa2, k_c, h_c_sq, eh_c2, total for the (x, t) grid.
Table mse_table(const RbmParams& p, const PerformanceMeasure& f,
                const std::vector<double>& xs, const std::vector<double>& ts);

// Analytic-vs-empirical comparison rows for one simulation run.
Table simulate_table(const RbmParams& p, const PerformanceMeasure& f, double x0,
                     const SimConfig& cfg);

}  // namespace rbm
