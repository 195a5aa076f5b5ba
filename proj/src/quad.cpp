#include "rbm/quad.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace rbm {
namespace {

// Gauss-Kronrod 7-15 pair on [-1,1]. Gauss nodes sit at the odd Kronrod
// indices plus the centre.
constexpr double xgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
    bool splittable;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = wgk[7] * fc;
    double resg = wg[3] * fc;
    double resabs = wgk[7] * std::fabs(fc);
    double fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        fv1[j] = f(c - dx);
        fv2[j] = f(c + dx);
        resk += wgk[j] * (fv1[j] + fv2[j]);
        resabs += wgk[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
        if (j % 2 == 1) resg += wg[j / 2] * (fv1[j] + fv2[j]);
    }
    const double reskh = resk * 0.5;
    double resasc = wgk[7] * std::fabs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += wgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
    resasc *= h;
    resabs *= h;
    double err = std::fabs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    const double round = 50.0 * eps * resabs;
    err = std::max(err, round);
    const bool splittable = (b - a) > 100.0 * eps * (std::fabs(a) + std::fabs(b) + 1.0);
    return Panel{a, b, resk * h, err, splittable};
}

QuadResult integrate_finite(const std::function<double(double)>& f, double a,
                            double b, const QuadSpec& spec) {
    std::priority_queue<Panel> live;
    double dead_value = 0.0, dead_error = 0.0;
    live.push(evaluate_panel(f, a, b));
    double live_value = live.top().value;
    double live_error = live.top().error;
    int used = 1;
    auto tolerance = [&](double total) {
        return std::max(spec.abs_tol, spec.rel_tol * std::fabs(total));
    };
    while (true) {
        const double total = live_value + dead_value;
        const double err = live_error + dead_error;
        if (err <= tolerance(total))
            return QuadResult{total, err, used};
        if (live.empty() || used >= spec.max_subdivisions)
            throw convergence_error("integrate: subdivision limit reached", total, err);
        Panel worst = live.top();
        live.pop();
        live_value -= worst.value;
        live_error -= worst.error;
        if (!worst.splittable) {
            dead_value += worst.value;
            dead_error += worst.error;
            continue;
        }
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        ++used;
        live_value += left.value + right.value;
        live_error += left.error + right.error;
        live.push(left);
        live.push(right);
    }
}

QuadResult integrate_semi_infinite(const std::function<double(double)>& f,
                                   double a, const QuadSpec& spec) {
    const double rate = spec.tail_rate > 0.0 ? spec.tail_rate : 1.0;
    auto transformed = [&](double u) {
        const double v = a - std::log(u) / rate;
        return f(v) / (rate * u);
    };
    try {
        return integrate_finite(transformed, 0.0, 1.0, spec);
    } catch (const convergence_error&) {
        // Envelope truncation: find where |f| v e^{rate (v-a)} drops below
        // abs_tol/100 assuming the declared exponential tail.
        double amp = 0.0;
        for (int k = 0; k <= 8; ++k) {
            const double v = a + k / rate;
            amp = std::max(amp, std::fabs(f(v)) * std::exp(static_cast<double>(k)));
        }
        if (amp == 0.0) return QuadResult{0.0, 0.0, 0};
        const double cut =
            a + std::max(1.0, std::log(100.0 * amp / spec.abs_tol)) / rate;
        return integrate_finite(f, a, cut, spec);
    }
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadSpec& spec) {
    if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0))
        throw std::domain_error("integrate: tolerances must be positive");
    if (spec.max_subdivisions < 1)
        throw std::domain_error("integrate: max_subdivisions must be >= 1");
    if (std::isinf(b)) return integrate_semi_infinite(f, a, spec);
    if (!(a < b)) throw std::domain_error("integrate: requires a < b");
    return integrate_finite(f, a, b, spec);
}

double find_root(const std::function<double(double)>& g, double lo, double hi,
                 double tol) {
    double a = lo, b = hi;
    double fa = g(a), fb = g(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw no_sign_change_error("find_root: no sign change over [lo, hi]");
    double c = a, fc = fa;
    double d = b - a, e = d;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < 200; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * eps * std::fabs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double rr = fb / fc;
                p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q),
                                   std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = g(b);
    }
    return b;
}

}  // namespace rbm
