#include "xvann/amc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xvann/errors.hpp"

namespace xvann::amc {

using instruments::BermudanSpec;
using instruments::SwapLeg;

void LatticeSpec::validate() const {
    if (steps_per_year < 12) throw DomainError("lattice needs at least 12 steps per year");
    if (width_sd < 4.0) throw DomainError("lattice width must be at least 4 standard deviations");
}

std::vector<Flow> underlying_flows(const BermudanSpec& b, double t_ex) {
    const double sign = b.payer ? 1.0 : -1.0;
    std::vector<Flow> out;
    const SwapLeg fx = instruments::entered_leg(b.fixed_leg, t_ex);
    const SwapLeg fl = instruments::entered_leg(b.float_leg, t_ex);
    const double nfix = fx.notional, nflt = fl.notional;
    for (const auto& q : fx.periods) out.push_back({q.end, -sign * nfix * q.coupon * q.tau});
    for (const auto& q : fl.periods) {
        out.push_back({q.start, sign * nflt * q.alpha});
        out.push_back({q.end, -sign * nflt * (q.alpha - q.beta * q.tau)});
    }
    if (fx.final_exchange) out.push_back({fx.maturity(), -sign * nfix});
    if (fl.final_exchange) out.push_back({fl.maturity(), sign * nflt});
    std::sort(out.begin(), out.end(), [](const Flow& a, const Flow& c) { return a.t < c.t; });
    // net flows on the same date, e.g. the float notional exchanges between periods
    std::vector<Flow> net;
    for (const auto& f : out) {
        if (!net.empty() && f.t - net.back().t < 1e-9) net.back().amount += f.amount;
        else net.push_back(f);
    }
    const double tiny = 1e-12 * std::max(nfix, nflt);
    std::erase_if(net, [&](const Flow& f) { return std::abs(f.amount) <= tiny; });
    return net;
}

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

struct Tree {
    double dt, dx;
    std::size_t steps;
    long jmax;
    std::vector<double> alpha;  // r = alpha[i] + j dx on [t_i, t_{i+1})
    // branching: target centre k and probabilities, per node offset j (same every step)
    std::vector<long> k;
    std::vector<double> pu, pm, pd;

    std::size_t width() const { return static_cast<std::size_t>(2 * jmax + 1); }
    std::size_t idx(long j) const { return static_cast<std::size_t>(j + jmax); }
    long reach(std::size_t i) const { return std::min<long>(static_cast<long>(i), jmax); }

    Tree(const market::YieldCurve& curve, double kappa, double sigma, double horizon, const LatticeSpec& s) {
        steps = static_cast<std::size_t>(std::ceil(horizon * static_cast<double>(s.steps_per_year) - 1e-9));
        dt = 1.0 / static_cast<double>(s.steps_per_year);
        const double decay = std::exp(-kappa * dt);
        const double var = sigma * sigma * market::decay_factor(2.0 * kappa, dt);
        dx = std::sqrt(3.0 * var);
        const double sd_max = sigma * std::sqrt(market::decay_factor(2.0 * kappa, horizon));
        // zero volatility collapses the tree to a single node per step
        jmax = var > 0.0 ? std::max<long>(2, static_cast<long>(std::ceil(s.width_sd * sd_max / dx))) : 0;
        k.resize(width());
        pu.resize(width());
        pm.resize(width());
        pd.resize(width());
        for (long j = -jmax; j <= jmax && jmax > 0; ++j) {
            const double e = static_cast<double>(j) * decay;  // mean in units of dx
            long c = std::lround(e);
            c = std::clamp(c, -jmax + 1, jmax - 1);
            const double a = e - static_cast<double>(c);
            // moment matching with variance dx^2 / 3; clipped at the truncated edges
            double u = 1.0 / 6.0 + 0.5 * (a * a + a), m = 2.0 / 3.0 - a * a, d = 1.0 / 6.0 + 0.5 * (a * a - a);
            u = std::max(u, 0.0), m = std::max(m, 0.0), d = std::max(d, 0.0);
            const double tot = u + m + d;
            k[idx(j)] = c;
            pu[idx(j)] = u / tot;
            pm[idx(j)] = m / tot;
            pd[idx(j)] = d / tot;
        }
        if (jmax == 0) k[0] = 0, pu[0] = 0.0, pm[0] = 1.0, pd[0] = 0.0;
        // forward induction of Arrow-Debreu prices fits alpha to the curve
        alpha.resize(steps);
        std::vector<double> q(width(), 0.0), next(width());
        q[idx(0)] = 1.0;
        for (std::size_t i = 0; i < steps; ++i) {
            const long r = reach(i);
            double s = 0.0;
            for (long j = -r; j <= r; ++j) s += q[idx(j)] * std::exp(-static_cast<double>(j) * dx * dt);
            const double p_next = curve.discount(static_cast<double>(i + 1) * dt);
            alpha[i] = std::log(s / p_next) / dt;
            std::fill(next.begin(), next.end(), 0.0);
            for (long j = -r; j <= r; ++j) {
                const double w = q[idx(j)] * std::exp(-(alpha[i] + static_cast<double>(j) * dx) * dt);
                const long c = k[idx(j)];
                next[idx(c)] += w * pm[idx(j)];
                if (jmax > 0) {
                    next[idx(c + 1)] += w * pu[idx(j)];
                    next[idx(c - 1)] += w * pd[idx(j)];
                }
            }
            q.swap(next);
        }
    }

    // One step back from i+1 to i.
    void rollback(std::size_t i, const std::vector<double>& v, std::vector<double>& out) const {
        const long r = reach(i);
        std::fill(out.begin(), out.end(), 0.0);
        for (long j = -r; j <= r; ++j) {
            const long c = k[idx(j)];
            double e = pm[idx(j)] * v[idx(c)];
            if (jmax > 0) e += pu[idx(j)] * v[idx(c + 1)] + pd[idx(j)] * v[idx(c - 1)];
            out[idx(j)] = e * std::exp(-(alpha[i] + static_cast<double>(j) * dx) * dt);
        }
    }

    std::size_t step_of(double t) const { return static_cast<std::size_t>(std::lround(t / dt)); }
};

}  // namespace

double lattice_bermudan(const market::YieldCurve& curve, const market::HullWhiteParams& p, const BermudanSpec& b,
                        const LatticeSpec& spec) {
    spec.validate();
    b.validate();
    if (!p.sigma.is_flat()) throw UnsupportedError("lattice requires a constant volatility");
    const double horizon = std::max(b.fixed_leg.maturity(), b.float_leg.maturity());
    const Tree tree(curve, p.kappa, p.sigma.values()[0], horizon, spec);
    const std::size_t w = tree.width();

    // underlying value of each exercise, rolled back from its last flow
    const std::size_t nm = b.exercise_dates.size();
    std::vector<std::vector<double>> u(nm);
    std::vector<double> v(w), tmp(w);
    for (std::size_t m = 0; m < nm; ++m) {
        const double t_ex = b.exercise_dates[m];
        const std::size_t s_ex = tree.step_of(t_ex);
        const auto flows = underlying_flows(b, t_ex);
        std::fill(v.begin(), v.end(), 0.0);
        std::size_t f = flows.size();
        for (std::size_t i = tree.steps + 1; i-- > s_ex;) {
            while (f > 0 && tree.step_of(flows[f - 1].t) == i) {
                for (auto& a : v) a += flows[f - 1].amount;
                --f;
            }
            if (i > s_ex) {
                tree.rollback(i - 1, v, tmp);
                v.swap(tmp);
            }
        }
        u[m] = v;
    }

    // the option itself
    std::fill(v.begin(), v.end(), 0.0);
    std::size_t m = nm;
    for (std::size_t i = tree.steps + 1; i-- > 0;) {
        while (m > 0 && tree.step_of(b.exercise_dates[m - 1]) == i) {
            --m;
            const long r = tree.reach(i);
            for (long j = -r; j <= r; ++j) v[tree.idx(j)] = std::max(v[tree.idx(j)], u[m][tree.idx(j)]);
        }
        if (i > 0) {
            tree.rollback(i - 1, v, tmp);
            v.swap(tmp);
        }
    }
    return v[tree.idx(0)];
}

EuropeanSwaption::EuropeanSwaption(const market::YieldCurve& curve, const market::HullWhiteParams& p,
                                   const BermudanSpec& b, std::size_t m)
    : curve_(&curve), p_(p), payer_(b.payer) {
    if (m >= b.exercise_dates.size()) throw ScheduleError("not an exercise date");
    te_ = b.exercise_dates[m];
    // swap at te = a0 - sum c_i P(te, T_i) with all c_i of the sign of a0
    for (const auto& f : underlying_flows(b, te_)) {
        if (f.t <= te_ + 1e-12) {
            a0_ += f.amount;
        } else {
            times_.push_back(f.t);
            coupons_.push_back(-f.amount);
        }
    }
    if (times_.empty()) return;
    for (double c : coupons_)
        if (c * a0_ <= 0.0) throw UnsupportedError("Jamshidian decomposition needs same-sign coupons");
    y_te_ = market::hw_variance_integral(p, te_);
    auto excess = [&](double x) {
        double s = 0.0;
        for (std::size_t i = 0; i < times_.size(); ++i)
            s += coupons_[i] * market::zero_bond(curve, p.kappa, te_, times_[i], x, y_te_);
        return s - a0_;
    };
    // the coupon bond is monotone in x: bracket and bisect for the critical state
    double lo = -0.5, hi = 0.5;
    while (excess(lo) * excess(hi) > 0.0 && hi < 100.0) lo *= 2.0, hi *= 2.0;
    if (excess(lo) * excess(hi) > 0.0) throw DomainError("no critical state for the Jamshidian split");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) * excess(lo) > 0.0 ? lo : hi) = mid;
    }
    const double xstar = 0.5 * (lo + hi);
    for (double T : times_) strikes_.push_back(market::zero_bond(curve, p.kappa, te_, T, xstar, y_te_));
}

double EuropeanSwaption::operator()(double t, double x_t) const {
    if (t > te_) throw DomainError("valuation time after expiry");
    if (times_.empty()) return 0.0;
    const double y_t = market::hw_variance_integral(p_, t);
    const double sd = std::sqrt(std::max(y_te_ - std::exp(-2.0 * p_.kappa * (te_ - t)) * y_t, 0.0));
    const double p_te = market::zero_bond(*curve_, p_.kappa, t, te_, x_t, y_t);
    double value = 0.0;
    for (std::size_t i = 0; i < times_.size(); ++i) {
        const double k = strikes_[i];
        const double p_ti = market::zero_bond(*curve_, p_.kappa, t, times_[i], x_t, y_t);
        const double sp = sd * market::bond_g(p_.kappa, times_[i] - te_);
        double opt;  // payer: put on the coupon bond; receiver: call
        if (sp <= 0.0) {
            opt = payer_ ? std::max(k * p_te - p_ti, 0.0) : std::max(p_ti - k * p_te, 0.0);
        } else {
            const double h = std::log(p_ti / (p_te * k)) / sp + 0.5 * sp;
            opt = payer_ ? k * p_te * norm_cdf(-h + sp) - p_ti * norm_cdf(-h)
                         : p_ti * norm_cdf(h) - k * p_te * norm_cdf(h - sp);
        }
        value += std::abs(coupons_[i]) * opt;
    }
    return value;
}

double jamshidian_swaption(const market::YieldCurve& curve, const market::HullWhiteParams& p, const BermudanSpec& b,
                           std::size_t m, double t, double x_t) {
    return EuropeanSwaption(curve, p, b, m)(t, x_t);
}

}  // namespace xvann::amc
