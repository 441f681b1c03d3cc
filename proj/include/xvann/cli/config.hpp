#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xvann/analysis/analysis.hpp"
#include "xvann/bsde/engine.hpp"
#include "xvann/exposure/exposure.hpp"
#include "xvann/instruments/bermudan.hpp"
#include "xvann/instruments/xccy.hpp"
#include "xvann/market/model.hpp"

namespace xvann::cli {

enum class Product { Bermudan, Xccy };
enum class Method { Nn, Proxy, Amc, Lattice };
std::string to_string(Product p);
std::string to_string(Method m);
Method parse_method(const std::string& s);

// One entry of the key registry. Keys are "section.name".
struct KeySpec {
    std::string key;
    std::string unit;
    std::string fallback;  // default value; empty string with required = true means no default
    std::string help;
    std::string scope;     // "", "bermudan" or "xccy"
    bool required = false;
};
const std::vector<KeySpec>& config_keys();
std::string keys_help();

struct RunConfig {
    Product product = Product::Bermudan;
    Method method = Method::Nn;
    std::uint64_t seed = 1;
    int threads = 1;

    market::MarketModel model;
    instruments::BermudanTerms berm;
    instruments::MtmXccySpec xccy;

    int steps_per_year = 12;
    std::vector<double> extra_dates;

    bsde::NetConfig net;
    bsde::TrainConfig training;  // threads and hooks are filled at run time
    std::size_t paths = 8192, holdout_paths = 8192;

    std::vector<double> credit_dates;  // empty: every grid date
    bool discounted = true;
    bool exposure_on_holdout = true;
    exposure::CreditCurve cpty, own;

    analysis::KnnConfig knn;
    double fit_scale = 1e7;
    std::vector<double> bachelier_dates;
    std::vector<double> projection_dates;
    std::vector<double> projection_target{0.0, 0.0};
    std::size_t bootstrap_resamples = 200;
    double bootstrap_level = 0.95;
    std::vector<std::string> amc_basis;
    int lattice_steps_per_year = 600;
    double lattice_width_sd = 7.0;

    // Every applicable key with its materialized value, in registry order.
    std::vector<std::pair<std::string, std::string>> values;
    std::string hash;  // 16 hex digits over the canonical echo

    std::string echo() const;
};

// Parses INI text. Throws ConfigError naming the offending key.
RunConfig parse_config_text(const std::string& text, const std::map<std::string, std::string>& overrides = {});
RunConfig parse_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace xvann::cli
