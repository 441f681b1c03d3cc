#include "xvann/cli/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include "xvann/amc/lattice.hpp"
#include "xvann/amc/lsm.hpp"
#include "xvann/cli/io.hpp"
#include "xvann/instruments/bermudan.hpp"
#include "xvann/instruments/xccy.hpp"
#include "xvann/market/simulation.hpp"

namespace xvann::cli {

namespace fs = std::filesystem;

std::string to_string(Stage s) {
    switch (s) {
        case Stage::Simulate: return "simulate";
        case Stage::Train: return "train";
        case Stage::Expose: return "expose";
        case Stage::Analyze: return "analyze";
    }
    return "?";
}

std::vector<Stage> parse_stages(const std::string& s) {
    if (s == "all") return {Stage::Simulate, Stage::Train, Stage::Expose, Stage::Analyze};
    std::set<Stage> picked;
    std::string tok;
    std::istringstream is(s);
    while (std::getline(is, tok, ',')) {
        if (tok == "simulate") picked.insert(Stage::Simulate);
        else if (tok == "train") picked.insert(Stage::Train);
        else if (tok == "expose") picked.insert(Stage::Expose);
        else if (tok == "analyze") picked.insert(Stage::Analyze);
        else throw ConfigError("--stages: unknown stage '" + tok + "'");
    }
    if (picked.empty()) throw ConfigError("--stages: no stage given");
    return {picked.begin(), picked.end()};
}

namespace {

constexpr std::uint64_t kHoldoutSalt = 0x9E3779B97F4A7C15ULL;

std::string date_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", t);
    return buf;
}

amc::RegressionBasis parse_basis(const std::vector<std::string>& words) {
    amc::RegressionBasis b;
    b.fns.clear();
    for (const auto& w : words) {
        if (w == "one") b.fns.push_back(amc::Basis::One);
        else if (w == "x") b.fns.push_back(amc::Basis::X);
        else if (w == "x2") b.fns.push_back(amc::Basis::X2);
        else if (w == "x3") b.fns.push_back(amc::Basis::X3);
        else if (w == "exercise") b.fns.push_back(amc::Basis::Exercise);
        else if (w == "exercise2") b.fns.push_back(amc::Basis::Exercise2);
        else if (w == "zcb") b.fns.push_back(amc::Basis::Zcb);
        else if (w == "european") b.fns.push_back(amc::Basis::European);
        else throw ConfigError("analysis.amc_basis: unknown basis function '" + w + "'");
    }
    return b;
}

double sample_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (double a : v) m += a;
    m /= n;
    double s = 0.0;
    for (double a : v) s += (a - m) * (a - m);
    return std::sqrt(s / (n - 1.0) / n);
}

// Value of the entered swap on exercised paths, for physical settlement.
std::vector<double> physical_underlying(const instruments::BermudanSpec& b, const market::CurrencyModel& ccy,
                                        const market::TimeGrid& grid, const market::PathCube& cube,
                                        const std::vector<std::uint8_t>& eta, const std::vector<std::size_t>& ex_idx) {
    const std::size_t np = cube.paths(), dates = grid.size(), nm = ex_idx.size();
    std::vector<double> u(np * dates, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
        std::size_t m = nm;
        for (std::size_t k = 0; k < nm; ++k)
            if (eta[p * nm + k] == 0) {
                m = k;
                break;
            }
        if (m == nm) continue;
        const double te = b.exercise_dates[m];
        const auto flt = instruments::entered_leg(b.float_leg, te);
        for (std::size_t n = ex_idx[m]; n < dates; ++n) {
            const double t = grid[n];
            std::vector<double> fix(flt.periods.size(), instruments::kNoFixing);
            for (std::size_t k = 0; k < flt.periods.size(); ++k) {
                const auto& per = flt.periods[k];
                if (per.start <= t + market::TimeGrid::date_tolerance)
                    fix[k] = instruments::libor_fixing(ccy, per.start, per.end, per.tau,
                                                       cube.x(0, p, grid.index_of(per.start)));
            }
            const auto st = instruments::make_state(ccy, t, cube.x(0, p, n));
            u[p * dates + n] = instruments::underlying_value(b, te, st, fix);
        }
    }
    return u;
}

std::string profile_csv(const exposure::ExposureProfile& prof, Method m) {
    std::ostringstream os;
    os << "# method=" << to_string(m) << "\n";
    os << "date_years,epe,epe_se,ene,ene_se,side\n";
    for (const auto& r : prof.rows)
        os << fmt(r.t) << "," << fmt(r.epe) << "," << fmt(r.epe_se) << "," << fmt(r.ene) << "," << fmt(r.ene_se)
           << "," << exposure::to_string(r.side) << "\n";
    return os.str();
}

std::string curve_text(const std::vector<double>& pillars, const std::vector<double>& values) {
    std::ostringstream os;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ",";
        os << fmt(values[i]);
        if (i < pillars.size()) os << "@" << fmt(pillars[i]);
    }
    return os.str();
}

std::string xy_csv(const analysis::ScatterSet& s, const char* vname) {
    std::ostringstream os;
    os << "x," << vname << "\n";
    for (std::size_t i = 0; i < s.size(); ++i) os << fmt(s.x[i]) << "," << fmt(s.v[i]) << "\n";
    return os.str();
}

std::string fit_text(const analysis::FitReport& f) {
    std::ostringstream os;
    for (std::size_t i = 0; i < f.names.size(); ++i) {
        os << f.names[i] << " = " << fmt(f.params[i]);
        if (i < f.lower.size()) os << "  bounds [" << fmt(f.lower[i]) << ", " << fmt(f.upper[i]) << "]";
        os << "\n";
    }
    os << "r2 = " << fmt(f.r2) << "\nrss = " << fmt(f.rss) << "\nconverged = " << f.converged
       << "\niterations = " << f.iterations << "\n";
    return os.str();
}

}  // namespace

Pipeline::Pipeline(RunConfig cfg, fs::path out, std::ostream* log) : cfg_(std::move(cfg)), dir_(std::move(out)), log_(log) {
    std::vector<double> events = cfg_.extra_dates;
    double horizon = 0.0;
    if (cfg_.product == Product::Bermudan) {
        const auto b = instruments::make_bermudan(cfg_.berm);
        for (const auto* leg : {&b.fixed_leg, &b.float_leg})
            for (const auto& p : leg->periods) events.insert(events.end(), {p.start, p.end});
        events.insert(events.end(), b.exercise_dates.begin(), b.exercise_dates.end());
        horizon = b.fixed_leg.maturity();
    } else {
        events.insert(events.end(), cfg_.xccy.dates.begin(), cfg_.xccy.dates.end());
        horizon = cfg_.xccy.dates.back();
    }
    for (double t : cfg_.model.breakpoints())
        if (t > 0.0 && t < horizon) events.push_back(t);
    std::erase_if(events, [&](double t) { return t > horizon + market::TimeGrid::date_tolerance; });
    grid_ = market::TimeGrid::build(horizon, cfg_.steps_per_year, events);

    if (cfg_.product == Product::Bermudan) {
        for (double t : cfg_.berm.exercise_dates) {
            exercise_idx_.push_back(grid_.index_of(t));
            grid_.mark(t, market::kExercise);
        }
        horizon_ = exercise_idx_.back();
        pre_idx_ = exercise_idx_;
        for (double t : cfg_.bachelier_dates) analysis_idx_.push_back(grid_.index_of(t));
    } else {
        horizon_ = grid_.steps();
        for (std::size_t k = 0; k < cfg_.xccy.dates.size(); ++k) {
            grid_.mark(cfg_.xccy.dates[k], market::kReset);
            if (k > 0) {
                grid_.mark(cfg_.xccy.dates[k], market::kCashflow);
                pre_idx_.push_back(grid_.index_of(cfg_.xccy.dates[k]));
            }
        }
        for (double t : cfg_.projection_dates) analysis_idx_.push_back(grid_.index_of(t));
    }
    if (cfg_.credit_dates.empty()) {
        for (std::size_t n = 0; n < grid_.size(); ++n) credit_idx_.push_back(n);
    } else {
        for (double t : cfg_.credit_dates) {
            if (!grid_.contains(t))
                throw ConfigError("exposure.credit_dates: " + fmt(t) + " is not a simulation date");
            credit_idx_.push_back(grid_.index_of(t));
        }
        std::sort(credit_idx_.begin(), credit_idx_.end());
        credit_idx_.erase(std::unique(credit_idx_.begin(), credit_idx_.end()), credit_idx_.end());
    }
    for (auto n : credit_idx_) grid_.mark(grid_[n], market::kCredit);
}

void Pipeline::say(const std::string& s) const {
    if (log_) *log_ << s << std::endl;
}

bool Pipeline::needs_holdout() const {
    return cfg_.exposure_on_holdout && cfg_.method != Method::Lattice;
}

void Pipeline::run(const std::vector<Stage>& stages) {
    check_directory(dir_, cfg_.hash);
    fs::create_directories(dir_);
    write_text(dir_ / "config.txt", cfg_.echo(), cfg_.hash);
    std::ostringstream man;
    man << "version = " << kVersion << "\nformat_version = " << kFormatVersion << "\ncompiler = g++ " << __VERSION__
        << "\nproduct = " << to_string(cfg_.product) << "\nmethod = " << to_string(cfg_.method)
        << "\nseed = " << cfg_.seed << "\nholdout_seed = " << cfg_.seed + kHoldoutSalt
        << "\ngrid_dates = " << grid_.size() << "\nhorizon_index = " << horizon_ << "\nstages =";
    for (auto s : stages) man << " " << to_string(s);
    man << "\n";
    write_text(dir_ / "manifest.txt", man.str(), cfg_.hash);

    for (auto s : stages) {
        say("[" + to_string(s) + "]");
        switch (s) {
            case Stage::Simulate: simulate(); break;
            case Stage::Train: train(); break;
            case Stage::Expose: expose(); break;
            case Stage::Analyze: analyze(); break;
        }
    }
}

const market::PathCube& Pipeline::train_cube() {
    if (!train_) train_ = read_cube(dir_ / "paths", "train", cfg_.hash);
    return *train_;
}

const market::PathCube& Pipeline::eval_cube() {
    if (!needs_holdout()) return train_cube();
    if (!holdout_) holdout_ = read_cube(dir_ / "paths", "holdout", cfg_.hash);
    return *holdout_;
}

std::vector<double> Pipeline::exercise_values(const std::string& which, const market::PathCube& cube) {
    if (cfg_.product != Product::Bermudan) return {};
    const auto file = dir_ / "paths" / (which + "_exercise.bin");
    if (fs::exists(file)) {
        auto a = read_array(file, "XVAPATHS", 3);
        if (a.hash != cfg_.hash) throw OrchestrationError(file.string() + " was written by config " + a.hash);
        return std::move(a.data);
    }
    return instruments::exercise_value_cube(instruments::make_bermudan(cfg_.berm), cfg_.model.domestic, grid_, cube);
}

bsde::Problem Pipeline::problem(const market::PathCube& cube, const std::vector<double>* exercise) {
    if (cfg_.product == Product::Bermudan)
        return bsde::make_problem(cube, horizon_, cfg_.berm.notional, {}, exercise_idx_, *exercise);
    return bsde::make_problem(cube, horizon_, cfg_.xccy.domestic_notional(cfg_.model),
                              instruments::xccy_cashflows(cfg_.xccy, cfg_.model, grid_, cube));
}

void Pipeline::simulate() {
    if (cfg_.method == Method::Lattice) {
        say("  lattice method: no scenarios needed");
        return;
    }
    fs::create_directories(dir_ / "paths");
    auto dump = [&](const std::string& stem, std::uint64_t seed, std::size_t paths, std::optional<market::PathCube>& slot) {
        slot = market::simulate_multiccy(cfg_.model, grid_, paths, seed, cfg_.threads);
        write_cube(dir_ / "paths", stem, *slot, cfg_.hash);
        if (cfg_.product == Product::Bermudan) {
            auto u = instruments::exercise_value_cube(instruments::make_bermudan(cfg_.berm), cfg_.model.domestic,
                                                      grid_, *slot);
            write_array(dir_ / "paths" / (stem + "_exercise.bin"), "XVAPATHS",
                        {1, paths, exercise_idx_.size()}, u, cfg_.hash);
        }
        say("  " + stem + ": " + std::to_string(paths) + " paths x " + std::to_string(grid_.size()) + " dates");
    };
    dump("train", cfg_.seed, cfg_.paths, train_);
    if (needs_holdout()) dump("holdout", cfg_.seed + kHoldoutSalt, cfg_.holdout_paths, holdout_);
}

void Pipeline::train() {
    if (cfg_.method == Method::Lattice) {
        const auto b = instruments::make_bermudan(cfg_.berm);
        amc::LatticeSpec ls;
        ls.steps_per_year = static_cast<std::size_t>(cfg_.lattice_steps_per_year);
        ls.width_sd = cfg_.lattice_width_sd;
        out_.lattice = amc::lattice_bermudan(cfg_.model.domestic.curve, cfg_.model.domestic.hw, b, ls);
        std::ostringstream os;
        os << "v0 = " << fmt(out_.lattice) << "\nsteps_per_year = " << ls.steps_per_year
           << "\nwidth_sd = " << fmt(ls.width_sd) << "\n";
        write_text(dir_ / "lattice.txt", os.str(), cfg_.hash);
        say("  lattice v0 " + fmt(out_.lattice));
        return;
    }
    if (cfg_.method == Method::Proxy) {
        say("  proxy method: nothing to train");
        return;
    }
    const auto& cube = train_cube();
    ex_train_ = exercise_values("train", cube);
    const auto pr = problem(cube, &ex_train_);

    if (cfg_.method == Method::Amc) {
        const auto b = instruments::make_bermudan(cfg_.berm);
        const auto basis = parse_basis(cfg_.amc_basis);
        const auto feat = amc::bermudan_features(b, cfg_.model.domestic, grid_, cube, basis);
        const auto res = amc::amc_exposure(pr, feat, basis.fns.size());
        const std::size_t nb = basis.fns.size(), nm = exercise_idx_.size();
        std::vector<double> coef(nm * nb, 0.0);
        for (std::size_t m = 0; m < nm; ++m)
            for (Eigen::Index k = 0; k < res.exercise_coef[m].size(); ++k)
                coef[m * nb + static_cast<std::size_t>(k)] = res.exercise_coef[m][k];
        write_array(dir_ / "amc_policy.bin", "XVAAMCPL", {nm, nb}, coef, cfg_.hash);
        say("  amc in-sample v0 " + fmt(res.v0) + " (se " + fmt(res.v0_se) + ")");
        return;
    }

    auto st = bsde::init_state(pr, cfg_.net, cfg_.seed);
    auto tc = cfg_.training;
    tc.threads = cfg_.threads;
    tc.on_step = [&](std::size_t step, double loss) {
        if (step % 100 == 0) say("  step " + std::to_string(step) + " loss " + fmt(loss));
    };
    auto write_loss = [&](const std::vector<double>& h) {
        std::ostringstream os;
        os << "step,loss\n";
        for (std::size_t i = 0; i < h.size(); ++i) os << i << "," << fmt(h[i]) << "\n";
        write_text(dir_ / "loss.csv", os.str(), cfg_.hash);
    };
    try {
        auto res = bsde::train(pr, std::move(st), tc);
        write_loss(res.loss_history);
        write_checkpoint(dir_ / "checkpoint", res.state, cfg_.hash);
        out_.loss_history = std::move(res.loss_history);
        say("  trained v0 " + fmt(res.state.v0() * pr.notional));
    } catch (const bsde::DivergenceError& e) {
        write_loss(e.history());
        throw;
    }
}

void Pipeline::expose() {
    if (cfg_.method == Method::Lattice) {
        if (std::isnan(out_.lattice)) {
            const auto s = read_text(dir_ / "lattice.txt", cfg_.hash);
            out_.lattice = std::stod(s.substr(s.find('=') + 1));
        }
        out_.v0 = out_.lattice;
        out_.v0_se = 0.0;
        std::ostringstream os;
        os << "method = lattice\nv0 = " << fmt(out_.v0) << "\n";
        write_text(dir_ / "summary.txt", os.str(), cfg_.hash);
        say("  lattice prices only; no exposure profile");
        return;
    }
    const auto& cube = eval_cube();
    const std::string which = needs_holdout() ? "holdout" : "train";
    ex_eval_ = exercise_values(which, cube);
    const auto pr = problem(cube, &ex_eval_);
    const std::size_t np = cube.paths(), dates = grid_.size(), nm = exercise_idx_.size();

    std::vector<std::uint8_t> eta;
    if (cfg_.method == Method::Nn) {
        const auto st = read_checkpoint(dir_ / "checkpoint", cfg_.hash);
        if (st.steps() != horizon_ || st.factors() != cube.factors())
            throw OrchestrationError("checkpoint does not match the simulation grid");
        auto r = bsde::rollout(pr, st, cfg_.training.style, cfg_.threads);
        v_pre_ = std::move(r.v_pre);
        v_post_ = std::move(r.v_post);
        eta = std::move(r.eta);
        out_.v0 = st.v0() * pr.notional;
        std::vector<double> per_path(np);
        for (std::size_t p = 0; p < np; ++p) {
            if (cfg_.training.style == bsde::LossStyle::Backward) {
                per_path[p] = v_pre_[p * dates];
            } else {
                double s = 0.0;
                for (std::size_t n = 0; n <= horizon_; ++n) s += pr.cf(p, n) / cube.numeraire(p, n);
                per_path[p] = s * pr.notional;
            }
        }
        out_.v0_se = sample_se(per_path);
    } else if (cfg_.method == Method::Amc) {
        const auto b = instruments::make_bermudan(cfg_.berm);
        const auto basis = parse_basis(cfg_.amc_basis);
        const std::size_t nb = basis.fns.size();
        auto pol = read_array(dir_ / "amc_policy.bin", "XVAAMCPL", 2);
        if (pol.hash != cfg_.hash) throw OrchestrationError("amc_policy.bin was written by config " + pol.hash);
        if (pol.dims != std::vector<std::uint64_t>{nm, nb}) throw FormatError("amc_policy.bin: wrong dimensions");
        std::vector<Eigen::VectorXd> policy(nm, Eigen::VectorXd(static_cast<Eigen::Index>(nb)));
        for (std::size_t m = 0; m < nm; ++m)
            for (std::size_t k = 0; k < nb; ++k) policy[m][static_cast<Eigen::Index>(k)] = pol.data[m * nb + k];
        const auto feat = amc::bermudan_features(b, cfg_.model.domestic, grid_, cube, basis);
        auto res = amc::amc_exposure(pr, feat, nb, &policy);
        v_pre_ = std::move(res.v_pre);
        v_post_ = std::move(res.v_post);
        eta = std::move(res.eta);
        out_.v0 = res.v0;
        out_.v0_se = res.v0_se;
    } else {
        v_pre_.assign(np * dates, 0.0);
        v_post_.assign(np * dates, 0.0);
        const std::size_t s_idx = cfg_.model.fx_index(0);
        for (std::size_t p = 0; p < np; ++p) {
            const auto fix = instruments::path_fixings(cfg_.xccy, cfg_.model, grid_, cube, p);
            for (std::size_t n = 0; n <= horizon_; ++n) {
                instruments::XccyState s{grid_[n], cube.x(0, p, n), cube.x(1, p, n), std::exp(cube.x(s_idx, p, n))};
                const double post = n == horizon_ ? 0.0 : instruments::proxy_swap_value(cfg_.xccy, cfg_.model, s, fix);
                v_post_[p * dates + n] = post;
                v_pre_[p * dates + n] = post + pr.cf(p, n) * pr.notional;
            }
        }
        out_.v0 = v_pre_[0];
        out_.v0_se = 0.0;
    }

    std::vector<std::uint8_t> alive_pre, alive_post;
    std::vector<double> underlying;
    if (cfg_.product == Product::Bermudan) {
        alive_pre = exposure::cumulative_alive_indicator(eta, np, exercise_idx_, dates);
        alive_post = alive_pre;
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t m = 0; m < nm; ++m)
                if (eta[p * nm + m] == 0) alive_post[p * dates + exercise_idx_[m]] = 0;
        if (cfg_.berm.settlement == instruments::Settlement::Physical)
            underlying = physical_underlying(instruments::make_bermudan(cfg_.berm), cfg_.model.domestic, grid_, cube,
                                             eta, exercise_idx_);
    }
    std::vector<double> disc(np * dates);
    for (std::size_t p = 0; p < np; ++p)
        for (std::size_t n = 0; n < dates; ++n) disc[p * dates + n] = cube.discount(p, n);

    exposure::SurfaceInputs in;
    in.paths = np;
    in.dates = dates;
    in.times = grid_.dates();
    in.v_pre = v_pre_;
    in.v_post = v_post_;
    in.alive_pre = alive_pre;
    in.alive_post = alive_post;
    in.discount = disc;
    in.settlement = cfg_.product == Product::Bermudan ? cfg_.berm.settlement : instruments::Settlement::Cash;
    in.underlying = underlying;
    in.discounted = cfg_.discounted;
    out_.profile = exposure::exposure_profile(in, credit_idx_, pre_idx_, cfg_.threads);
    out_.cva = exposure::cva_dva(out_.profile, cfg_.cpty, cfg_.own);

    write_array(dir_ / "values_pre.bin", "XVAPATHS", {1, np, dates}, v_pre_, cfg_.hash);
    write_array(dir_ / "values_post.bin", "XVAPATHS", {1, np, dates}, v_post_, cfg_.hash);
    write_text(dir_ / "exposure.csv", profile_csv(out_.profile, cfg_.method), cfg_.hash);

    std::ostringstream cva;
    cva << "method = " << to_string(cfg_.method) << "\ncva = " << fmt(out_.cva.cva) << "\ndva = " << fmt(out_.cva.dva)
        << "\nextrapolated = " << out_.cva.extrapolated << "\ndiscounted_profile = " << cfg_.discounted
        << "\ncpty_recovery = " << fmt(cfg_.cpty.recovery)
        << "\ncpty_hazards = " << curve_text(cfg_.cpty.pillars, cfg_.cpty.hazards)
        << "\nown_recovery = " << fmt(cfg_.own.recovery)
        << "\nown_hazards = " << curve_text(cfg_.own.pillars, cfg_.own.hazards) << "\nscenarios = " << which
        << "\npaths = " << np << "\n";
    write_text(dir_ / "cva.txt", cva.str(), cfg_.hash);

    std::ostringstream sum;
    sum << "method = " << to_string(cfg_.method) << "\nv0 = " << fmt(out_.v0) << "\nv0_se = " << fmt(out_.v0_se)
        << "\nscenarios = " << which << "\npaths = " << np << "\n";
    write_text(dir_ / "summary.txt", sum.str(), cfg_.hash);
    say("  v0 " + fmt(out_.v0) + " (se " + fmt(out_.v0_se) + "), cva " + fmt(out_.cva.cva) + ", dva " +
        fmt(out_.cva.dva));
}

void Pipeline::load_values() {
    if (!v_post_.empty()) return;
    auto a = read_array(dir_ / "values_pre.bin", "XVAPATHS", 3);
    auto b = read_array(dir_ / "values_post.bin", "XVAPATHS", 3);
    if (a.hash != cfg_.hash || b.hash != cfg_.hash) throw OrchestrationError("value surfaces belong to another config");
    v_pre_ = std::move(a.data);
    v_post_ = std::move(b.data);
}

void Pipeline::analyze() {
    if (cfg_.method == Method::Lattice) {
        say("  lattice method: nothing to analyze");
        return;
    }
    const auto& cube = eval_cube();
    if (v_post_.empty()) {
        if (!fs::exists(dir_ / "values_post.bin")) throw OrchestrationError("analyze needs the expose stage first");
        load_values();
    }
    const std::size_t np = cube.paths(), dates = grid_.size();
    if (v_post_.size() != np * dates) throw OrchestrationError("value surfaces do not match the scenario set");

    std::ostringstream fits;
    fits << "method = " << to_string(cfg_.method) << "\nknn_k = " << cfg_.knn.k
         << "\nknn_grid_points = " << cfg_.knn.grid_points << "\n";
    out_.bachelier.clear();
    out_.convexity.clear();

    if (cfg_.product == Product::Bermudan) {
        fits << "notional = " << fmt(cfg_.berm.notional) << "\n";
        for (auto n : analysis_idx_) {
            analysis::ScatterSet s;
            for (std::size_t p = 0; p < np; ++p) {
                s.x.push_back(cube.x(0, p, n));
                s.v.push_back(v_post_[p * dates + n]);
            }
            BachelierRow row;
            row.t = grid_[n];
            row.projected = analysis::knn_project(s, {}, cfg_.knn, {}, cfg_.threads);
            const auto bounds = analysis::BachelierBounds::defaults(row.projected, cfg_.berm.notional);
            row.fit = analysis::bachelier_fit(row.projected, bounds);
            write_text(dir_ / ("scatter_" + date_tag(row.t) + ".csv"), xy_csv(s, "v"), cfg_.hash);
            write_text(dir_ / ("projected_" + date_tag(row.t) + ".csv"), xy_csv(row.projected, "v_hat"), cfg_.hash);
            fits << "\n[bachelier t=" << fmt(row.t) << "]\nvalue = continuation V(t+) against x_0\n"
                 << fit_text(row.fit);
            say("  bachelier t=" + fmt(row.t) + " r2 " + fmt(row.fit.r2));
            out_.bachelier.push_back(std::move(row));
        }
    } else {
        fits << "fit_scale = " << fmt(cfg_.fit_scale) << "\nprojection_target = " << fmt(cfg_.projection_target[0])
             << "," << fmt(cfg_.projection_target[1]) << "\nbootstrap_resamples = " << cfg_.bootstrap_resamples
             << "\nbootstrap_level = " << fmt(cfg_.bootstrap_level) << "\n";
        const std::size_t s_idx = cfg_.model.fx_index(0);
        for (auto n : analysis_idx_) {
            analysis::ScatterSet s;
            s.cond.assign(2, {});
            for (std::size_t p = 0; p < np; ++p) {
                s.x.push_back(std::exp(cube.x(s_idx, p, n)));
                s.v.push_back(v_post_[p * dates + n]);
                s.cond[0].push_back(cube.x(0, p, n));
                s.cond[1].push_back(cube.x(1, p, n));
            }
            ConvexityRow row;
            row.t = grid_[n];
            row.projected = analysis::knn_project(s, cfg_.projection_target, cfg_.knn, {}, cfg_.threads);
            row.fit = analysis::quadratic_fit(row.projected, cfg_.fit_scale);
            row.ci = analysis::bootstrap_projected_quadratic(s, cfg_.projection_target, cfg_.knn, row.projected.x,
                                                             cfg_.fit_scale, cfg_.bootstrap_level,
                                                             cfg_.bootstrap_resamples, cfg_.seed, cfg_.threads);
            write_text(dir_ / ("scatter_" + date_tag(row.t) + ".csv"), xy_csv(s, "v"), cfg_.hash);
            write_text(dir_ / ("projected_" + date_tag(row.t) + ".csv"), xy_csv(row.projected, "v_hat"), cfg_.hash);
            fits << "\n[quadratic t=" << fmt(row.t) << "]\nvalue = V(t) against S(t) projected to the target\n"
                 << fit_text(row.fit) << "a_over_b = " << fmt(row.fit.ratio) << "\na_interval = [" << fmt(row.ci.lo)
                 << ", " << fmt(row.ci.hi) << "]\n";
            if (cfg_.method == Method::Proxy) {
                // the proxy value is a closed-form function of the state, so it can be
                // evaluated at the target itself
                const auto fix = instruments::path_fixings(cfg_.xccy, cfg_.model, grid_, cube, 0);
                analysis::ScatterSet ex;
                for (double sx : row.projected.x) {
                    instruments::XccyState st{row.t, cfg_.projection_target[0], cfg_.projection_target[1], sx};
                    ex.x.push_back(sx);
                    ex.v.push_back(instruments::proxy_swap_value(cfg_.xccy, cfg_.model, st, fix));
                }
                row.exact = analysis::quadratic_fit(ex, cfg_.fit_scale);
                fits << "[quadratic t=" << fmt(row.t) << " proxy at target]\n" << fit_text(*row.exact)
                     << "a_over_b = " << fmt(row.exact->ratio) << "\n";
            }
            say("  quadratic t=" + fmt(row.t) + " a " + fmt(row.fit.params[0]) + " in [" + fmt(row.ci.lo) + ", " +
                fmt(row.ci.hi) + "]");
            out_.convexity.push_back(std::move(row));
        }
    }
    write_text(dir_ / "fits.txt", fits.str(), cfg_.hash);
}

bool check_run(const Pipeline& pl, std::ostream& report) {
    const auto& cfg = pl.config();
    const auto& o = pl.outputs();
    bool ok = true;
    auto line = [&](bool pass, const std::string& what) {
        report << (pass ? "PASS " : "FAIL ") << what << "\n";
        ok = ok && pass;
    };
    if (o.profile.rows.empty()) {
        line(false, "exposure profile available (run the expose stage)");
        return false;
    }
    if (cfg.product == Product::Bermudan) {
        const double notional = cfg.berm.notional;
        double worst = 0.0;
        for (const auto& r : o.profile.rows) worst = std::max(worst, std::abs(r.ene) - 3.0 * r.ene_se);
        line(worst <= 0.005 * notional, "ENE within 0.5% of notional (worst " + fmt(worst) + ")");
        for (double t : cfg.berm.exercise_dates) {
            const auto n = pl.grid().index_of(t);
            const auto& pre = o.profile.at(n, exposure::Side::Pre);
            const auto& post = o.profile.at(n, exposure::Side::Post);
            line(post.epe < pre.epe, "EPE drops at exercise " + fmt(t) + " (" + fmt(pre.epe) + " -> " +
                                         fmt(post.epe) + ")");
        }
        if (cfg.berm.settlement == instruments::Settlement::Cash) {
            double tail = 0.0;
            for (const auto& r : o.profile.rows)
                if (r.t > cfg.berm.exercise_dates.back() + 1e-9) tail = std::max(tail, r.epe);
            line(tail == 0.0, "EPE vanishes after the last exercise (max " + fmt(tail) + ")");
        }
    } else {
        const double dn = cfg.xccy.domestic_notional(cfg.model);
        for (std::size_t k = 0; k + 1 < cfg.xccy.dates.size(); ++k) {
            const auto& r = o.profile.at(pl.grid().index_of(cfg.xccy.dates[k]), exposure::Side::Post);
            line(r.epe <= 1e-3 * dn && std::abs(r.ene) <= 1e-3 * dn,
                 "exposure after reset " + fmt(r.t) + " within 0.1% of notional (EPE " + fmt(r.epe) + ", ENE " +
                     fmt(r.ene) + ")");
        }
    }
    return ok;
}

}  // namespace xvann::cli
