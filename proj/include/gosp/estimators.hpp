#pragma once

#include "gosp/dynamics.hpp"
#include "gosp/stats.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gosp {

// Estimators decline to produce a number when their preconditions fail at run
// time. The runner maps these to exit code 2.
class Refusal : public std::runtime_error {
 public:
  Refusal(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct SummaryRow {
  std::string estimator;
  double p = 0;
  Coord T = 0;
  std::uint64_t reps = 0;
  Estimate est;
  std::uint64_t seed = 0;
};

// Output common to every estimator: records (one per replica or sweep point,
// in canonical order), summary rows and free-form details.
struct Report {
  std::vector<nlohmann::json> records;
  std::vector<SummaryRow> summary;
  nlohmann::json details = nlohmann::json::object();
};

struct Run {
  std::uint64_t seed = 0;
  int threads = 1;
};

Field replica_field(const NormalizedModel& model, double p, std::uint64_t seed, std::uint64_t i);

// ---- survival ------------------------------------------------------------------------------

struct SurvivalResult {
  Estimate alive;               // P(alive at T)
  std::vector<double> curve;    // curve[t] = P(alive at t), t = 0..T
  std::vector<Coord> taus;      // -1 when alive at T
  Report report;
};

SurvivalResult survival_curve(const NormalizedModel& model, double p, Coord T, std::uint64_t reps,
                              const Run& run);
SurvivalResult dual_survival_curve(const NormalizedModel& model, double p, Coord T,
                                   std::uint64_t reps, const Run& run);

struct CriticalPoint {
  double lo = 0, hi = 1;
  std::vector<std::pair<double, double>> sweep;   // (p, event frequency)
  std::vector<double> stability;                  // bracket midpoints for independent seeds
  double spread = 0;                              // max - min of stability
  Report report;
};

// Bisection on the frequency of reaching time T or extent L_stop against 1/2.
// A finite-size proxy for the critical probability.
CriticalPoint critical_point(const NormalizedModel& model, Coord T, Coord L_stop,
                             std::uint64_t reps, double tol, const Run& run,
                             int stability_seeds = 3);

struct DeathFit {
  LineFit fit;
  std::vector<std::uint64_t> tail;   // tail[t - lo] = #{t <= tau <= T}
  std::uint64_t deaths_in_window = 0;
  Report report;
};

DeathFit death_bound_fit(const NormalizedModel& model, double p, Coord T, std::uint64_t reps,
                         Coord window_lo, Coord window_hi, const Run& run,
                         std::uint64_t min_deaths = 20);

struct DecayWindow {
  Coord lo = 0, hi = 0;
  double c_ratio = 0;   // mean of -log P(tau >= t) / t over the window
  double c_slope = 0;   // minus the slope of log P(tau >= t) over the window
  std::uint64_t min_count = 0;
};

struct SubcriticalDecay {
  std::vector<DecayWindow> windows;
  std::vector<std::uint64_t> at_least;   // at_least[t] = #{tau >= t}
  double relative_gap = 0;               // between the first two windows' ratio estimates
  Report report;
};

SubcriticalDecay subcritical_decay(const NormalizedModel& model, double p, Coord T,
                                   std::uint64_t reps, const Run& run,
                                   std::vector<std::pair<Coord, Coord>> windows = {{40, 60}, {60, 80}},
                                   std::uint64_t min_count = 3);

struct TorusSize {
  Coord n = 0;
  std::vector<Coord> taus;   // -1 for Survived(T_max)
  std::uint64_t censored = 0;
  Estimate mean;
  double mean_over_log_n = 0;
  double ks = 0;
};

struct TorusStats {
  std::vector<TorusSize> sizes;
  std::optional<LineFit> mean_vs_log_n;     // meaningful in the subcritical regime
  std::optional<LineFit> log_mean_vs_volume;  // supercritical: log mean against n^(d-1)
  std::optional<double> target_slope;       // (d-1) / c when c is given
  Report report;
};

TorusStats torus_stats(const NormalizedModel& model, double p, const std::vector<Coord>& sizes,
                       std::uint64_t reps, Coord T_max, const Run& run,
                       std::optional<double> decay_rate = {}, double max_censored = 0.01);

// ---- shape and edges -----------------------------------------------------------------------

struct ShapeEstimate {
  std::vector<std::vector<double>> directions;
  std::vector<double> support;         // max <x,u>/t over the largest component of H cap K
  std::vector<double> support_stderr;
  std::vector<double> mu_hat;          // time constants from hitting-time regression
  std::vector<double> radius;          // intercept of U_hat along each direction
  std::vector<double> centre;
  double containment = 0;              // frequency of xi_t inside (1+eps) t U_hat about centre
  double acceptance = 0;               // fraction of runs surviving to T_cond
  Coord t = 0, T_cond = 0;
  std::uint64_t reps = 0;
  double p = 0;
  Report report;

  // d == 2: U_hat = [left, right].
  double left() const { return -support[1]; }
  double right() const { return support[0]; }
};

ShapeEstimate shape_and_time_constants(const NormalizedModel& model, double p, Coord t,
                                       std::uint64_t reps, int grid, Coord T_cond,
                                       const Run& run, double eps = 0.1,
                                       double min_acceptance = 0.05);

struct EdgeSpeeds {
  Estimate alpha, beta;
  double alpha_upper = 0;   // min over t of mean r_t / t
  double beta_lower = 0;    // max over t of mean l_t / t
  std::vector<double> mean_right, mean_left;
  Report report;
};

EdgeSpeeds edge_speeds(const NormalizedModel& model, double p, Coord T, std::uint64_t reps,
                       const Run& run);

// ---- duality and density -------------------------------------------------------------------

struct MeetResult {
  Estimate failure;      // both alive and disjoint
  Estimate both_alive;
  std::vector<Coord> displacement;
  Report report;
};

MeetResult primal_dual_meet(const NormalizedModel& model, double p, Coord t, std::uint64_t reps,
                            const std::vector<Rational>& v_hat, const Run& run);

struct DensityLevel {
  Coord n = 0;
  Estimate mean;
  std::vector<double> below;                 // frequency of Y_n <= a for each a
  std::vector<std::uint64_t> histogram;      // 20 equal bins on [0,1]
  std::vector<double> samples;
};

struct DensitySpectrum {
  std::vector<double> levels;   // the a grid
  std::vector<DensityLevel> sizes;
  Report report;
};

// Y_n: fraction of B_n whose dual survives to depth T_inf. Smaller boxes are
// nested in the largest one and share its field.
DensitySpectrum density_spectrum(const NormalizedModel& model, double p,
                                 const std::vector<Coord>& ns, Coord T_inf, std::uint64_t reps,
                                 const std::vector<double>& levels, const Run& run);

// ---- restricted regions --------------------------------------------------------------------

struct CrossingResult {
  Estimate crossed;
  Coord width = 0;
  Report report;
};

// Frequency that the process from the left half slab, restricted to the tilted
// box of half-width max(1, floor(eps L)) and height L + R, is alive at time L.
CrossingResult crossing_probability(const NormalizedModel& model, double p, Coord L, double eps,
                                    const Rational& slope, std::uint64_t reps, const Run& run);

struct ConeSurvival {
  Estimate percolates;
  Coord start_window = 0;
  Report report;
};

ConeSurvival restricted_cone_survival(const NormalizedModel& model, double p, const Polytope& O,
                                      Coord T, Coord t0, std::uint64_t reps, const Run& run,
                                      const ShapeEstimate* shape = nullptr);

struct BgResult {
  Estimate event;
  Report report;
};

BgResult bg_event_probability(const NormalizedModel& model, double p, const BlockGeometry& g,
                              Coord n, std::uint64_t reps, const Run& run);

struct GoodBlock {
  Estimate good;
  Estimate event1, event2, event3;
  Report report;
};

GoodBlock good_block_probability(const NormalizedModel& model, double p, Coord L, Coord C,
                                 const std::vector<Rational>& v, std::uint64_t reps,
                                 const Run& run);

// ---- crossing paths ------------------------------------------------------------------------

struct TransferGeometry {
  Coord L = 0;
  double box_eps = 0.1;
  Rational alpha, beta;   // tilts of the two boxes
  Coord n = 1;            // thickening half-width
};

struct ProbeShift {
  Coord t = 0;
  Coord v = 0;
};

// Smallest t (then smallest |v|, then v) with xi^o_t containing v + B_n at p = 1.
ProbeShift thickening_probe(const NormalizedModel& model, Coord n, Coord max_t = 256);

using Path = std::vector<std::pair<Coord, Coord>>;   // (x, t)

struct CrossingSample {
  bool crossed = false;           // both boxes crossed
  Path gamma, gamma_prime;
  bool share_vertex = false;      // gamma and gamma' intersect
  bool hat_meets = false;         // thickened gamma meets gamma'
  bool transfer = false;          // a_0 reaches a'_m' through gamma, gamma' and sprinkled sites
};

CrossingSample analyse_crossing(const NormalizedModel& model, const FieldSpec& field,
                                const TransferGeometry& g, const ProbeShift& probe);

struct TransferResult {
  Estimate crossing;     // fraction of sampled fields crossing both boxes
  Estimate transfer;     // among crossing samples
  Estimate hat_meets;    // among crossing samples
  Estimate share_vertex; // among crossing samples
  std::uint64_t crossing_samples = 0;
  ProbeShift probe;
  Report report;
};

// Samples fields until `reps` crossing samples are found or the attempt budget
// (reps * retry) runs out.
TransferResult path_crossing_transfer(const NormalizedModel& model, double p, double eps,
                                      const TransferGeometry& g, std::uint64_t reps,
                                      const Run& run, std::uint64_t retry = 20);

}  // namespace gosp
