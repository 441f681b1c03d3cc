#include "xvann/instruments/xccy.hpp"

#include <cmath>

#include "xvann/errors.hpp"

namespace xvann::instruments {

SwapLeg MtmXccySpec::float_leg(const market::MarketModel& model) const {
    SwapLeg leg;
    leg.type = LegType::Float;
    leg.direction = -mtm_direction;
    leg.final_exchange = float_final_exchange;
    leg.periods = periods();
    for (auto& p : leg.periods) p.beta = float_spread;
    if (float_currency == FloatLegCurrency::Foreign) {
        leg.currency = foreign;
        leg.notional = foreign_notional;
    } else {
        leg.currency = 0;
        leg.notional = foreign_notional * model.fx.at(foreign - 1).spot;
    }
    return leg;
}

double MtmXccySpec::domestic_notional(const market::MarketModel& model) const {
    return foreign_notional * model.fx.at(foreign - 1).spot;
}

void MtmXccySpec::validate(const market::MarketModel& model) const {
    if (!(foreign_notional > 0.0)) throw ConfigError("xccy: notional must be positive");
    if (foreign < 1 || foreign > model.n_foreign())
        throw ConfigError("xccy: foreign currency index out of range");
    if (mtm_direction != 1 && mtm_direction != -1) throw ConfigError("xccy: direction must be +1 or -1");
    if (dates.empty() || dates.front() != 0.0)
        throw ScheduleError("xccy: the first reset must be at time 0");
    float_leg(model).validate();
}

double mtm_leg_cashflow(double foreign_notional, double s_n, double s_next, double libor, double tau) {
    return foreign_notional * (s_n * (1.0 + libor * tau) - s_next);
}

namespace {

const market::CurrencyModel& foreign_ccy(const MtmXccySpec& spec, const market::MarketModel& m) {
    return m.foreign.at(spec.foreign - 1);
}

double required(const std::vector<double>& v, std::size_t i, const char* what) {
    if (i >= v.size() || std::isnan(v[i]))
        throw FixingError(std::string("xccy: missing past ") + what + " fixing");
    return v[i];
}

}  // namespace

double decoupled_fx_forward(const market::MarketModel& model, std::size_t foreign,
                            const XccyState& st, double T) {
    const LegState dom = make_state(model.domestic, st.t, st.x_dom);
    const LegState fgn = make_state(model.foreign.at(foreign - 1), st.t, st.x_for);
    return st.fx * fgn.bond(T) / dom.bond(T);
}

double proxy_mtm_value(const MtmXccySpec& spec, const market::MarketModel& model,
                       const XccyState& st, const XccyFixings& fixings) {
    const auto periods = spec.periods();
    const LegState dom = make_state(model.domestic, st.t, st.x_dom);
    const LegState fgn = make_state(foreign_ccy(spec, model), st.t, st.x_for, st.fx);
    // expected S(T) under the decoupling assumption
    auto fx_forward = [&](double T) { return st.fx * fgn.bond(T) / dom.bond(T); };
    double sum = 0.0;
    for (std::size_t n = 0; n < periods.size(); ++n) {
        const auto& p = periods[n];
        if (p.end <= st.t) continue;
        double s_n, l_n;
        if (p.start < st.t) {
            s_n = required(fixings.fx, n, "FX");
            l_n = required(fixings.dom_rate, n, "rate");
        } else {
            s_n = fx_forward(p.start);
            l_n = forward_rate(dom, p.start, p.end, p.tau);
        }
        sum += mtm_leg_cashflow(1.0, s_n, fx_forward(p.end), l_n, p.tau) * dom.bond(p.end);
    }
    return spec.foreign_notional * sum;
}

double proxy_swap_value(const MtmXccySpec& spec, const market::MarketModel& model,
                        const XccyState& st, const XccyFixings& fixings) {
    const SwapLeg leg = spec.float_leg(model);
    double flt;
    if (leg.currency == 0) {
        flt = float_leg_value(leg, make_state(model.domestic, st.t, st.x_dom), fixings.dom_rate);
    } else {
        flt = float_leg_value(leg, make_state(foreign_ccy(spec, model), st.t, st.x_for, st.fx),
                              fixings.for_rate);
    }
    return spec.mtm_direction * proxy_mtm_value(spec, model, st, fixings) + leg.direction * flt;
}

XccyFixings path_fixings(const MtmXccySpec& spec, const market::MarketModel& model,
                         const market::TimeGrid& grid, const market::PathCube& cube, std::size_t p) {
    const auto periods = spec.periods();
    const std::size_t s_idx = model.fx_index(spec.foreign - 1);
    XccyFixings f;
    for (const auto& per : periods) {
        const std::size_t k = grid.index_of(per.start);
        f.fx.push_back(std::exp(cube.x(s_idx, p, k)));
        f.dom_rate.push_back(libor_fixing(model.domestic, per.start, per.end, per.tau, cube.x(0, p, k)));
        f.for_rate.push_back(libor_fixing(foreign_ccy(spec, model), per.start, per.end, per.tau,
                                          cube.x(spec.foreign, p, k)));
    }
    return f;
}

std::vector<double> xccy_cashflows(const MtmXccySpec& spec, const market::MarketModel& model,
                                   const market::TimeGrid& grid, const market::PathCube& cube) {
    const auto periods = spec.periods();
    const SwapLeg leg = spec.float_leg(model);
    const std::size_t s_idx = model.fx_index(spec.foreign - 1);
    const std::size_t dates = grid.size();
    std::vector<double> cf(cube.paths() * dates, 0.0);
    std::vector<std::size_t> start_idx, end_idx;
    for (const auto& per : periods) {
        start_idx.push_back(grid.index_of(per.start));
        end_idx.push_back(grid.index_of(per.end));
    }
    for (std::size_t p = 0; p < cube.paths(); ++p) {
        const XccyFixings f = path_fixings(spec, model, grid, cube, p);
        for (std::size_t n = 0; n < periods.size(); ++n) {
            const auto& per = periods[n];
            const double s_end = std::exp(cube.x(s_idx, p, end_idx[n]));
            double mtm = mtm_leg_cashflow(spec.foreign_notional, f.fx[n], s_end, f.dom_rate[n], per.tau);
            double flt;
            if (leg.currency == 0) {
                flt = leg.notional * (f.dom_rate[n] + spec.float_spread) * per.tau;
                if (leg.final_exchange && n + 1 == periods.size()) flt += leg.notional;
            } else {
                flt = leg.notional * (f.for_rate[n] + spec.float_spread) * per.tau;
                if (leg.final_exchange && n + 1 == periods.size()) flt += leg.notional;
                flt *= s_end;
            }
            cf[p * dates + end_idx[n]] += spec.mtm_direction * mtm + leg.direction * flt;
        }
    }
    return cf;
}

}  // namespace xvann::instruments
