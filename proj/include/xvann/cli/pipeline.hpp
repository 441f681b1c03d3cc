#pragma once

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "xvann/analysis/analysis.hpp"
#include "xvann/bsde/engine.hpp"
#include "xvann/cli/config.hpp"
#include "xvann/exposure/exposure.hpp"
#include "xvann/market/path_cube.hpp"
#include "xvann/market/time_grid.hpp"

namespace xvann::cli {

inline constexpr const char* kVersion = "1.0.0";

enum class Stage { Simulate, Train, Expose, Analyze };
std::string to_string(Stage s);
// "all" or a comma separated list of stage names.
std::vector<Stage> parse_stages(const std::string& s);

struct BachelierRow {
    double t = 0.0;
    analysis::ScatterSet projected;
    analysis::FitReport fit;
};

struct ConvexityRow {
    double t = 0.0;
    analysis::ScatterSet projected;
    analysis::FitReport fit;
    analysis::Interval ci;
    // proxy method only: the proxy value evaluated at the conditioning target
    std::optional<analysis::FitReport> exact;
};

// Results of the stages that ran in this process.
struct RunOutputs {
    double v0 = std::numeric_limits<double>::quiet_NaN();
    double v0_se = std::numeric_limits<double>::quiet_NaN();
    double lattice = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> loss_history;
    exposure::ExposureProfile profile;
    exposure::CvaResult cva;
    std::vector<BachelierRow> bachelier;
    std::vector<ConvexityRow> convexity;
};

// Artifacts under the output directory:
//   config.txt, manifest.txt                       every invocation
//   paths/{train,holdout}_{x,dw,hedge,numeraire}.bin, {train,holdout}_exercise.bin   simulate
//   loss.csv + checkpoint/ (nn), amc_policy.bin (amc), lattice.txt (lattice)          train
//   values_pre.bin, values_post.bin, exposure.csv, cva.txt, summary.txt              expose
//   fits.txt, scatter_<t>.csv, projected_<t>.csv                                     analyze
// Each stage reads what it needs from disk when an earlier stage did not run in
// the same process.
class Pipeline {
   public:
    Pipeline(RunConfig cfg, std::filesystem::path out, std::ostream* log = nullptr);

    void run(const std::vector<Stage>& stages);
    const RunOutputs& outputs() const { return out_; }
    const market::TimeGrid& grid() const { return grid_; }
    const RunConfig& config() const { return cfg_; }

   private:
    void simulate();
    void train();
    void expose();
    void analyze();

    const market::PathCube& train_cube();
    const market::PathCube& eval_cube();
    std::vector<double> exercise_values(const std::string& which, const market::PathCube& cube);
    bsde::Problem problem(const market::PathCube& cube, const std::vector<double>* exercise);
    bool needs_holdout() const;
    void load_values();
    void say(const std::string& s) const;

    RunConfig cfg_;
    std::filesystem::path dir_;
    std::ostream* log_;
    market::TimeGrid grid_;
    std::size_t horizon_ = 0;
    std::vector<std::size_t> exercise_idx_, credit_idx_, pre_idx_;
    std::vector<std::size_t> analysis_idx_;

    std::optional<market::PathCube> train_, holdout_;
    std::vector<double> ex_train_, ex_eval_;
    std::vector<double> v_pre_, v_post_;
    RunOutputs out_;
};

// Acceptance-style checks of a finished run; one line per check into `report`.
// Returns false if any check failed.
bool check_run(const Pipeline& p, std::ostream& report);

}  // namespace xvann::cli
