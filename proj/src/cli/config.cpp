#include "xvann/cli/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "xvann/errors.hpp"

namespace xvann::cli {

std::string to_string(Product p) { return p == Product::Bermudan ? "bermudan" : "xccy"; }

std::string to_string(Method m) {
    switch (m) {
        case Method::Nn: return "nn";
        case Method::Proxy: return "proxy";
        case Method::Amc: return "amc";
        case Method::Lattice: return "lattice";
    }
    return "?";
}

Method parse_method(const std::string& s) {
    if (s == "nn") return Method::Nn;
    if (s == "proxy") return Method::Proxy;
    if (s == "amc") return Method::Amc;
    if (s == "lattice") return Method::Lattice;
    throw ConfigError("run.method: expected nn, proxy, amc or lattice, got '" + s + "'");
}

const std::vector<KeySpec>& config_keys() {
    static const std::vector<KeySpec> keys{
        {"run.product", "-", "", "bermudan or xccy", "", true},
        {"run.method", "-", "nn", "nn, proxy (xccy), amc or lattice (bermudan)", ""},
        {"run.seed", "integer", "1", "scenario and network initialization seed", ""},
        {"run.threads", "count", "1", "worker threads", ""},

        {"model.domestic", "name", "USD", "domestic currency label", ""},
        {"model.domestic_pillars", "years", "0", "forward curve pillars, first is 0", ""},
        {"model.domestic_forwards", "1/year", "", "instantaneous forwards f(0,t), one per pillar", "", true},
        {"model.domestic_kappa", "1/year", "", "Hull-White mean reversion", "", true},
        {"model.domestic_sigma", "1/year", "", "Hull-White volatility, one per sigma pillar", "", true},
        {"model.domestic_sigma_pillars", "years", "0", "start of each volatility piece", ""},
        {"model.foreign", "name", "CAD", "foreign currency label", "xccy"},
        {"model.foreign_pillars", "years", "0", "foreign forward curve pillars", "xccy"},
        {"model.foreign_forwards", "1/year", "", "foreign instantaneous forwards", "xccy", true},
        {"model.foreign_kappa", "1/year", "", "foreign mean reversion", "xccy", true},
        {"model.foreign_sigma", "1/year", "", "foreign volatility, one per sigma pillar", "xccy", true},
        {"model.foreign_sigma_pillars", "years", "0", "start of each foreign volatility piece", "xccy"},
        {"model.fx_spot", "domestic per foreign", "", "initial FX rate S(0)", "xccy", true},
        {"model.fx_eta", "1/year", "", "FX volatility, one per eta pillar", "xccy", true},
        {"model.fx_eta_pillars", "years", "0", "start of each FX volatility piece", "xccy"},
        {"model.rho_dom_for", "-", "0", "correlation of x_0 and x_1", "xccy"},
        {"model.rho_dom_fx", "-", "0", "correlation of x_0 and ln S", "xccy"},
        {"model.rho_for_fx", "-", "0", "correlation of x_1 and ln S", "xccy"},

        {"instrument.notional", "currency", "10000", "swap notional", "bermudan"},
        {"instrument.fixed_rate", "1/year", "0.028", "fixed coupon", "bermudan"},
        {"instrument.swap_start", "years", "1.5", "first accrual start of the underlying", "bermudan"},
        {"instrument.swap_end", "years", "4.0", "underlying maturity", "bermudan"},
        {"instrument.fixed_step", "years", "0.5", "fixed leg period", "bermudan"},
        {"instrument.float_step", "years", "0.25", "float leg period", "bermudan"},
        {"instrument.exercise_dates", "years", "1.5,2,2.5,3,3.5", "exercise dates", "bermudan"},
        {"instrument.direction", "-", "payer", "payer or receiver", "bermudan"},
        {"instrument.settlement", "-", "cash", "cash or physical", "bermudan"},
        {"instrument.foreign_notional", "foreign currency", "10000", "MtM leg notional N_f", "xccy"},
        {"instrument.dates", "years", "0,0.25,0.5,0.75,0.83", "reset and payment dates", "xccy"},
        {"instrument.mtm_direction", "-", "receive", "receive or pay the MtM leg", "xccy"},
        {"instrument.float_currency", "-", "foreign", "currency of the float leg: foreign or domestic", "xccy"},
        {"instrument.float_final_exchange", "bool", "false", "float leg final notional exchange", "xccy"},
        {"instrument.float_spread", "1/year", "0", "float leg spread", "xccy"},

        {"grid.steps_per_year", "1/year", "12", "regular simulation dates per year", ""},
        {"grid.extra_dates", "years", "", "additional simulation dates", ""},

        {"nn.extra_width", "count", "10", "hidden width is d plus this", ""},
        {"nn.activation", "-", "tanh", "tanh, relu or sigmoid", ""},
        {"nn.bias", "bool", "true", "biases in the hidden and output layers", ""},
        {"nn.share_weights", "bool", "false", "one network for all steps with time as input", ""},

        {"training.steps", "count", "1000", "Adam iterations", ""},
        {"training.lr", "-", "0.01", "Adam learning rate", ""},
        {"training.lr_decay_rate", "-", "0.1", "learning rate factor per lr_decay_steps", ""},
        {"training.lr_decay_steps", "count", "1000", "decay horizon of the learning rate", ""},
        {"training.beta1", "-", "0.9", "Adam first moment decay", ""},
        {"training.beta2", "-", "0.999", "Adam second moment decay", ""},
        {"training.epsilon", "-", "1e-8", "Adam denominator floor", ""},
        {"training.paths", "count", "8192", "training scenarios", ""},
        {"training.holdout_paths", "count", "8192", "evaluation scenarios", ""},
        {"training.batch_paths", "count", "0", "mini-batch size, 0 for full batch", ""},
        {"training.loss", "-", "auto", "forward, backward or auto (backward for bermudan)", ""},

        {"exposure.credit_dates", "years", "all", "exposure dates on the grid, or all", ""},
        {"exposure.discounted", "bool", "true", "report D(0,t)-weighted exposures", ""},
        {"exposure.scenarios", "-", "holdout", "holdout or training paths", ""},
        {"exposure.cpty_hazards", "1/year", "0.02", "counterparty hazard rates", ""},
        {"exposure.cpty_pillars", "years", "", "end of each counterparty hazard piece", ""},
        {"exposure.cpty_recovery", "-", "0.4", "counterparty recovery", ""},
        {"exposure.own_hazards", "1/year", "0.01", "own hazard rates", ""},
        {"exposure.own_pillars", "years", "", "end of each own hazard piece", ""},
        {"exposure.own_recovery", "-", "0.4", "own recovery", ""},

        {"analysis.knn_k", "count", "50", "neighbours in the projection", ""},
        {"analysis.knn_grid_points", "count", "41", "abscissae of a projected curve", ""},
        {"analysis.fit_scale", "currency", "1e7", "V = scale (a S^2 + b S + c)", "xccy"},
        {"analysis.bachelier_dates", "years", "exercise", "dates of the Bachelier fits, or exercise", "bermudan"},
        {"analysis.projection_dates", "years", "auto", "dates of the (S, V) projections; auto is mid first period",
         "xccy"},
        {"analysis.projection_target", "-", "0,0", "conditioning point (x_0, x_1)", "xccy"},
        {"analysis.bootstrap_resamples", "count", "200", "path bootstrap resamples", "xccy"},
        {"analysis.bootstrap_level", "-", "0.95", "bootstrap interval coverage", "xccy"},
        {"analysis.amc_basis", "-", "one,exercise,exercise2,zcb",
         "regression basis: one x x2 x3 exercise exercise2 zcb european", "bermudan"},
        {"analysis.lattice_steps_per_year", "1/year", "600", "trinomial lattice density", "bermudan"},
        {"analysis.lattice_width_sd", "-", "7", "lattice half width in standard deviations", "bermudan"},
    };
    return keys;
}

std::string keys_help() {
    std::ostringstream os;
    std::string section;
    for (const auto& k : config_keys()) {
        const auto dot = k.key.find('.');
        const std::string sec = k.key.substr(0, dot);
        if (sec != section) {
            os << "[" << sec << "]\n";
            section = sec;
        }
        os << "  " << k.key.substr(dot + 1) << "  (" << k.unit << ")  " << k.help;
        if (k.required) os << "  [required]";
        else if (!k.fallback.empty()) os << "  [default " << k.fallback << "]";
        if (!k.scope.empty()) os << "  {" << k.scope << " only}";
        os << "\n";
    }
    return os.str();
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

class Values {
   public:
    explicit Values(std::map<std::string, std::string> v) : v_(std::move(v)) {}

    const std::string& str(const std::string& key) const { return v_.at(key); }

    double num(const std::string& key) const {
        const auto& s = str(key);
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || trim(s.substr(used)) != "" || !std::isfinite(d))
            throw ConfigError(key + ": expected a number, got '" + s + "'");
        return d;
    }

    double positive(const std::string& key) const {
        const double d = num(key);
        if (!(d > 0.0)) throw ConfigError(key + ": must be positive");
        return d;
    }

    std::size_t count(const std::string& key, std::size_t min = 0) const {
        const double d = num(key);
        if (d < static_cast<double>(min) || d != std::floor(d) || d > 1e12)
            throw ConfigError(key + ": expected an integer >= " + std::to_string(min));
        return static_cast<std::size_t>(d);
    }

    std::vector<double> list(const std::string& key) const {
        std::vector<double> out;
        std::string s = str(key);
        std::replace(s.begin(), s.end(), ',', ' ');
        std::istringstream is(s);
        std::string tok;
        while (is >> tok) {
            std::size_t used = 0;
            double d = 0.0;
            try {
                d = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || !std::isfinite(d))
                throw ConfigError(key + ": expected numbers, got '" + tok + "'");
            out.push_back(d);
        }
        return out;
    }

    std::vector<std::string> words(const std::string& key) const {
        std::string s = str(key);
        std::replace(s.begin(), s.end(), ',', ' ');
        std::istringstream is(s);
        std::vector<std::string> out;
        std::string tok;
        while (is >> tok) out.push_back(tok);
        return out;
    }

    bool flag(const std::string& key) const {
        const auto& s = str(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw ConfigError(key + ": expected true or false, got '" + s + "'");
    }

    std::string choice(const std::string& key, std::initializer_list<const char*> options) const {
        const auto& s = str(key);
        std::string all;
        for (const char* o : options) {
            if (s == o) return s;
            all += std::string(all.empty() ? "" : ", ") + o;
        }
        throw ConfigError(key + ": expected one of " + all + ", got '" + s + "'");
    }

   private:
    std::map<std::string, std::string> v_;
};

market::PiecewiseConstant term_structure(const Values& v, const std::string& values, const std::string& pillars) {
    const auto vals = v.list(values);
    auto br = v.list(pillars);
    if (vals.size() == 1 && br.size() <= 1) return market::PiecewiseConstant(vals[0]);
    if (vals.size() != br.size())
        throw ConfigError(values + ": " + std::to_string(vals.size()) + " values for " + std::to_string(br.size()) +
                          " pillars in " + pillars);
    for (double s : vals)
        if (s < 0.0) throw ConfigError(values + ": volatilities must be non-negative");
    try {
        return market::PiecewiseConstant(br, vals);
    } catch (const Error& e) {
        throw ConfigError(pillars + ": " + e.what());
    }
}

market::CurrencyModel currency(const Values& v, const std::string& prefix) {
    market::CurrencyModel c;
    c.name = v.str("model." + prefix);
    const auto pil = v.list("model." + prefix + "_pillars");
    const auto fwd = v.list("model." + prefix + "_forwards");
    if (pil.size() != fwd.size())
        throw ConfigError("model." + prefix + "_forwards: " + std::to_string(fwd.size()) + " values for " +
                          std::to_string(pil.size()) + " pillars");
    try {
        c.curve = market::YieldCurve(pil, fwd);
    } catch (const Error& e) {
        throw ConfigError("model." + prefix + "_pillars: " + e.what());
    }
    c.hw.kappa = v.positive("model." + prefix + "_kappa");
    c.hw.sigma = term_structure(v, "model." + prefix + "_sigma", "model." + prefix + "_sigma_pillars");
    return c;
}

exposure::CreditCurve credit(const Values& v, const std::string& who) {
    exposure::CreditCurve c;
    c.recovery = v.num("exposure." + who + "_recovery");
    c.hazards = v.list("exposure." + who + "_hazards");
    c.pillars = v.list("exposure." + who + "_pillars");
    if (c.pillars.empty() && c.hazards.size() == 1) c = exposure::CreditCurve::flat(c.hazards[0], c.recovery);
    try {
        c.validate();
    } catch (const Error& e) {
        throw ConfigError("exposure." + who + "_hazards: " + e.what());
    }
    return c;
}

}  // namespace

std::string RunConfig::echo() const {
    std::ostringstream os;
    std::string section;
    for (const auto& [k, val] : values) {
        const auto dot = k.find('.');
        const std::string sec = k.substr(0, dot);
        if (sec != section) {
            os << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
            section = sec;
        }
        os << k.substr(dot + 1) << " = " << val << "\n";
    }
    return os.str();
}

RunConfig parse_config_text(const std::string& text, const std::map<std::string, std::string>& overrides) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    std::map<std::string, std::string> given;
    for (const auto& [sec, body] : tree) {
        if (body.empty()) throw ConfigError(sec + ": keys must sit inside a [section]");
        for (const auto& [name, leaf] : body) given[sec + "." + name] = trim(leaf.data());
    }
    for (const auto& [k, val] : overrides) given[k] = val;

    std::set<std::string> known;
    for (const auto& k : config_keys()) known.insert(k.key);
    for (const auto& [k, val] : given)
        if (!known.count(k)) throw ConfigError(k + ": unknown key");

    if (!given.count("run.product")) {
        std::string req;
        for (const auto& k : config_keys())
            if (k.required) req += (req.empty() ? "" : ", ") + k.key + (k.scope.empty() ? "" : " (" + k.scope + ")");
        throw ConfigError("run.product: missing; required keys are " + req);
    }
    const std::string product = given["run.product"];
    if (product != "bermudan" && product != "xccy")
        throw ConfigError("run.product: expected bermudan or xccy, got '" + product + "'");

    RunConfig cfg;
    std::map<std::string, std::string> all;
    std::string missing;
    for (const auto& k : config_keys()) {
        const bool applies = k.scope.empty() || k.scope == product;
        auto it = given.find(k.key);
        if (!applies) {
            if (it != given.end()) throw ConfigError(k.key + ": does not apply to product " + product);
            continue;
        }
        std::string val = it != given.end() ? it->second : k.fallback;
        if (it == given.end() && k.required) {
            missing += (missing.empty() ? "" : ", ") + k.key;
            continue;
        }
        all[k.key] = val;
        cfg.values.emplace_back(k.key, val);
    }
    if (!missing.empty()) throw ConfigError(missing + ": required");
    const Values v(all);

    cfg.product = product == "bermudan" ? Product::Bermudan : Product::Xccy;
    cfg.method = parse_method(v.str("run.method"));
    if (cfg.product == Product::Bermudan && cfg.method == Method::Proxy)
        throw ConfigError("run.method: proxy applies to xccy only");
    if (cfg.product == Product::Xccy && (cfg.method == Method::Amc || cfg.method == Method::Lattice))
        throw ConfigError("run.method: amc and lattice apply to bermudan only");
    cfg.seed = v.count("run.seed");
    cfg.threads = static_cast<int>(v.count("run.threads", 1));

    cfg.model.domestic = currency(v, "domestic");
    if (cfg.product == Product::Xccy) {
        cfg.model.foreign.push_back(currency(v, "foreign"));
        market::FxModel fx;
        fx.spot = v.positive("model.fx_spot");
        fx.eta = term_structure(v, "model.fx_eta", "model.fx_eta_pillars");
        cfg.model.fx.push_back(fx);
        try {
            cfg.model.corr = market::CorrelationMatrix::from_upper(
                3, {v.num("model.rho_dom_for"), v.num("model.rho_dom_fx"), v.num("model.rho_for_fx")});
        } catch (const Error& e) {
            throw ConfigError(std::string("model.rho_dom_for: ") + e.what());
        }

        auto& s = cfg.xccy;
        s.foreign_notional = v.positive("instrument.foreign_notional");
        s.dates = v.list("instrument.dates");
        s.mtm_direction = v.choice("instrument.mtm_direction", {"receive", "pay"}) == "receive" ? 1 : -1;
        s.float_currency = v.choice("instrument.float_currency", {"foreign", "domestic"}) == "foreign"
                               ? instruments::FloatLegCurrency::Foreign
                               : instruments::FloatLegCurrency::Domestic;
        s.float_final_exchange = v.flag("instrument.float_final_exchange");
        s.float_spread = v.num("instrument.float_spread");
        try {
            s.validate(cfg.model);
        } catch (const Error& e) {
            throw ConfigError(std::string("instrument.dates: ") + e.what());
        }
    } else {
        auto& b = cfg.berm;
        b.notional = v.positive("instrument.notional");
        b.fixed_rate = v.num("instrument.fixed_rate");
        b.start = v.num("instrument.swap_start");
        b.end = v.num("instrument.swap_end");
        b.fixed_step = v.positive("instrument.fixed_step");
        b.float_step = v.positive("instrument.float_step");
        b.exercise_dates = v.list("instrument.exercise_dates");
        b.payer = v.choice("instrument.direction", {"payer", "receiver"}) == "payer";
        b.settlement = v.choice("instrument.settlement", {"cash", "physical"}) == "cash"
                           ? instruments::Settlement::Cash
                           : instruments::Settlement::Physical;
        try {
            instruments::make_bermudan(b).validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("instrument.exercise_dates: ") + e.what());
        }
    }
    try {
        cfg.model.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }

    cfg.steps_per_year = static_cast<int>(v.count("grid.steps_per_year", 1));
    cfg.extra_dates = v.list("grid.extra_dates");
    for (double t : cfg.extra_dates)
        if (t < 0.0) throw ConfigError("grid.extra_dates: dates must be non-negative");

    cfg.net.extra_width = v.count("nn.extra_width");
    try {
        cfg.net.activation = neural::parse_activation(v.str("nn.activation"));
    } catch (const Error& e) {
        throw ConfigError(std::string("nn.activation: ") + e.what());
    }
    cfg.net.bias = v.flag("nn.bias");
    cfg.net.share_weights = v.flag("nn.share_weights");

    auto& t = cfg.training;
    t.steps = v.count("training.steps");
    t.adam.lr = v.num("training.lr");
    if (t.adam.lr < 0.0) throw ConfigError("training.lr: must be non-negative");
    t.lr_decay_rate = v.positive("training.lr_decay_rate");
    t.lr_decay_steps = v.count("training.lr_decay_steps", 1);
    t.adam.beta1 = v.num("training.beta1");
    t.adam.beta2 = v.num("training.beta2");
    t.adam.eps = v.positive("training.epsilon");
    if (!(t.adam.beta1 >= 0.0 && t.adam.beta1 < 1.0)) throw ConfigError("training.beta1: must be in [0, 1)");
    if (!(t.adam.beta2 >= 0.0 && t.adam.beta2 < 1.0)) throw ConfigError("training.beta2: must be in [0, 1)");
    cfg.paths = v.count("training.paths", 2);
    cfg.holdout_paths = v.count("training.holdout_paths", 2);
    t.batch_paths = v.count("training.batch_paths");
    const auto loss = v.choice("training.loss", {"auto", "forward", "backward"});
    t.style = loss == "forward" || (loss == "auto" && cfg.product == Product::Xccy) ? bsde::LossStyle::Forward
                                                                                     : bsde::LossStyle::Backward;
    if (cfg.product == Product::Bermudan && t.style == bsde::LossStyle::Forward)
        throw ConfigError("training.loss: early exercise needs the backward loss");

    if (v.str("exposure.credit_dates") != "all") {
        cfg.credit_dates = v.list("exposure.credit_dates");
        if (cfg.credit_dates.empty()) throw ConfigError("exposure.credit_dates: empty list");
    }
    cfg.discounted = v.flag("exposure.discounted");
    cfg.exposure_on_holdout = v.choice("exposure.scenarios", {"holdout", "training"}) == "holdout";
    cfg.cpty = credit(v, "cpty");
    cfg.own = credit(v, "own");

    cfg.knn.k = v.count("analysis.knn_k", 1);
    cfg.knn.grid_points = v.count("analysis.knn_grid_points", 3);
    if (cfg.product == Product::Xccy) {
        cfg.fit_scale = v.positive("analysis.fit_scale");
        if (v.str("analysis.projection_dates") == "auto") {
            cfg.projection_dates = {0.5 * (cfg.xccy.dates[0] + cfg.xccy.dates[1])};
        } else {
            cfg.projection_dates = v.list("analysis.projection_dates");
        }
        for (double d : cfg.projection_dates)
            if (!(d > cfg.xccy.dates.front() && d < cfg.xccy.dates.back()))
                throw ConfigError("analysis.projection_dates: dates must lie inside the swap");
        cfg.projection_target = v.list("analysis.projection_target");
        if (cfg.projection_target.size() != 2)
            throw ConfigError("analysis.projection_target: expected two values (x_0, x_1)");
        cfg.bootstrap_resamples = v.count("analysis.bootstrap_resamples", 10);
        cfg.bootstrap_level = v.num("analysis.bootstrap_level");
        if (!(cfg.bootstrap_level > 0.0 && cfg.bootstrap_level < 1.0))
            throw ConfigError("analysis.bootstrap_level: must be in (0, 1)");
        cfg.extra_dates.insert(cfg.extra_dates.end(), cfg.projection_dates.begin(), cfg.projection_dates.end());
    } else {
        if (v.str("analysis.bachelier_dates") == "exercise") {
            cfg.bachelier_dates = cfg.berm.exercise_dates;
        } else {
            cfg.bachelier_dates = v.list("analysis.bachelier_dates");
        }
        for (double d : cfg.bachelier_dates) {
            const bool hit = std::any_of(cfg.berm.exercise_dates.begin(), cfg.berm.exercise_dates.end(),
                                         [&](double e) { return std::abs(e - d) < 1e-9; });
            if (!hit) throw ConfigError("analysis.bachelier_dates: " + std::to_string(d) + " is not an exercise date");
        }
        cfg.amc_basis = v.words("analysis.amc_basis");
        for (const auto& w : cfg.amc_basis) {
            static const std::set<std::string> ok{"one", "x", "x2", "x3", "exercise", "exercise2", "zcb", "european"};
            if (!ok.count(w)) throw ConfigError("analysis.amc_basis: unknown basis function '" + w + "'");
        }
        if (cfg.amc_basis.empty()) throw ConfigError("analysis.amc_basis: empty basis");
        cfg.lattice_steps_per_year = static_cast<int>(v.count("analysis.lattice_steps_per_year", 12));
        cfg.lattice_width_sd = v.num("analysis.lattice_width_sd");
        if (cfg.lattice_width_sd < 4.0) throw ConfigError("analysis.lattice_width_sd: must be at least 4");
    }

    // thread count does not change results, so it stays out of the hash
    RunConfig keyed;
    for (const auto& kv : cfg.values)
        if (kv.first != "run.threads") keyed.values.push_back(kv);
    cfg.hash = fnv1a_hex(keyed.echo());
    return cfg;
}

RunConfig parse_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str(), overrides);
}

}  // namespace xvann::cli
