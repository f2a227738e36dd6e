#pragma once

#include "gosp/bits.hpp"
#include "gosp/domain.hpp"
#include "gosp/field.hpp"
#include "gosp/geometry.hpp"
#include "gosp/model.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace gosp {

// A site of the slab: spatial coordinates plus row s in [0, R).
struct SlabSite {
  std::vector<Coord> x;
  int s = 0;
  auto operator<=>(const SlabSite&) const = default;
};

enum class Direction { Primal, Dual };

class Engine;

// Occupancy of the slab at one time. Row s of a primal state sits at absolute
// time origin + t + s; row s of a dual state at origin - t - s.
class ProcessState {
 public:
  ProcessState() = default;

  Direction direction() const { return dir_; }
  Coord t() const { return t_; }
  Coord origin() const { return origin_; }
  int R() const { return R_; }
  int spatial_dim() const { return D_; }
  const Box& window() const { return window_; }
  Coord absolute_time(int s) const { return dir_ == Direction::Primal ? origin_ + t_ + s : origin_ - t_ - s; }

  bool empty() const;
  std::size_t count() const;
  bool occupied(std::span<const Coord> x, int s) const;
  std::vector<SlabSite> sites() const;
  std::set<SlabSite> site_set() const;
  // Bounding box of occupied sites over all rows (empty box when empty).
  Box support() const;
  // Largest |x_i| over occupied sites; -1 when empty.
  Coord max_abs_coord() const;
  const bits::Words& row_bits(int s) const { return rows_[slot(s)]; }
  std::size_t index_of(std::span<const Coord> x) const;
  void coords_of(std::size_t idx, Coord* out) const;

 private:
  friend class Engine;
  friend ProcessState initial_state(const NormalizedModel&, const std::vector<SlabSite>&,
                                    const DomainSpec&, Coord, Direction);
  friend ProcessState full_slab_state(const NormalizedModel&, const Box&, Coord, Direction);
  std::size_t slot(int s) const { return static_cast<std::size_t>((head_ + s) % R_); }
  void assign(const NormalizedModel& model, const std::vector<SlabSite>& A, Coord origin,
              Direction dir);
  void set_window(const Box& b);
  void rewindow(const Box& b);
  void recompute_extent(int s);

  Direction dir_ = Direction::Primal;
  Coord t_ = 0, origin_ = 0;
  int R_ = 1, D_ = 1;
  Box window_;
  std::vector<Coord> strides_;
  std::size_t words_ = 0;
  int head_ = 0;
  std::vector<bits::Words> rows_;
  // Dual only: occupied sites that are open and in the domain (extendable).
  std::vector<bits::Words> ext_;
  std::vector<char> ext_ready_;
  struct Extent {
    bool any = false;
    std::vector<Coord> lo, hi;  // inclusive
  };
  std::vector<Extent> extent_;
};

// Allowed spatial box at an absolute time; sites outside are dropped.
using ClipRule = std::function<Box(Coord abs_time)>;

ProcessState initial_state(const NormalizedModel& model, const std::vector<SlabSite>& A,
                           const DomainSpec& domain = DomainSpec::full(), Coord origin = 0,
                           Direction dir = Direction::Primal);
// Every slab site of a spatial box, all R rows.
ProcessState full_slab_state(const NormalizedModel& model, const Box& spatial, Coord origin = 0,
                             Direction dir = Direction::Primal);

ProcessState step(const NormalizedModel& model, const ProcessState& state, const Field& field,
                  const DomainSpec& domain = DomainSpec::full());

// Steps a state in place, reusing buffers between steps.
class Engine {
 public:
  Engine(const NormalizedModel& model, const Field& field, const DomainSpec& domain,
         ClipRule clip = {});
  void reset(ProcessState state);
  // Reinitialises in place, keeping buffers.
  void restart(const std::vector<SlabSite>& A, Coord origin = 0,
               Direction dir = Direction::Primal);
  void set_field(const Field& field);
  void advance();
  ProcessState& state() { return st_; }
  const ProcessState& state() const { return st_; }
  // Marks extra sites in the top row (used to inject a start window).
  void add_top_row_sites(const std::vector<std::vector<Coord>>& xs);

 private:
  void ensure_margin(const Box& extra = Box{});
  void compute_ext(int s);
  void fill_new_row(bits::Words& out, ProcessState::Extent& ext, Coord tau, bool primal);

  const NormalizedModel& model_;
  Field field_;
  DomainSpec domain_;
  ClipRule clip_;
  ProcessState st_;
  bits::Words cand_;
  std::vector<std::int64_t> shifts_;
  std::vector<Coord> lo_, hi_;
};

class HittingData {
 public:
  HittingData() = default;
  HittingData(int spatial_dim, Coord horizon) : D_(spatial_dim), horizon_(horizon) {}
  Coord horizon() const { return horizon_; }
  std::optional<Coord> time(std::span<const Coord> x) const;
  void record(std::span<const Coord> x, Coord t);  // keeps the first time
  std::size_t size() const;
  // Spatial bounding box of hit sites.
  Box support() const;
  std::vector<std::pair<std::vector<Coord>, Coord>> entries() const;

 private:
  int D_ = 1;
  Coord horizon_ = 0;
  Coord lo_ = 0;
  std::vector<Coord> dense_;  // d == 2: -1 for unreached
  std::map<std::vector<Coord>, Coord> sparse_;
};

struct Probes {
  bool counts = true;
  bool hitting = false;
  bool edges = false;            // per-step max / min of the first spatial coordinate
  std::vector<Coord> snapshot_times;
  Coord snapshot_every = 0;      // 0 disables periodic snapshots
  Coord extent_stop = 0;         // stop once max |x|_inf reaches this (0 disables)
  ClipRule clip;
};

struct Trajectory {
  Coord horizon = 0;
  std::optional<Coord> tau;       // first empty time; nullopt means Survived(horizon)
  Coord last_t = 0;               // time of final_state
  std::optional<Coord> extent_reached;  // time the extent stop fired
  std::vector<std::uint64_t> counts;
  std::map<Coord, ProcessState> snapshots;
  std::optional<HittingData> hitting;
  std::vector<Coord> right_edge, left_edge;  // -kFar / kFar when empty
  ProcessState final_state;

  bool survived() const { return !tau.has_value(); }
};

// Steps a restarted engine until extinction, time T, or (if extent_stop > 0)
// the first time max |x_i| reaches extent_stop. Returns the stopping time and
// whether the process died.
struct StopInfo {
  Coord t = 0;
  bool died = false;
  bool extent = false;
};
StopInfo run_until(Engine& engine, Coord T, Coord extent_stop = 0);

Trajectory evolve(const NormalizedModel& model, const ProcessState& initial, const Field& field,
                  const DomainSpec& domain, Coord T, const Probes& probes = {});
Trajectory evolve(const NormalizedModel& model, const std::vector<SlabSite>& A, const Field& field,
                  const DomainSpec& domain, Coord T, const Probes& probes = {});
// Dual chain; row 0 of the initial state sits at absolute time origin.
Trajectory dual_evolve(const NormalizedModel& model, const std::vector<SlabSite>& A,
                       const Field& field, const DomainSpec& domain, Coord T, Coord origin = 0,
                       const Probes& probes = {});


// a ->[B] b: open sites of the domain stepping by offsets; reflexive.
bool reaches(const NormalizedModel& model, const Site& a, const Site& b, const Field& field,
             const DomainSpec& domain = DomainSpec::full());
// Dual path b ~> a: every site but the last open and in the domain; reflexive.
bool dual_reaches(const NormalizedModel& model, const Site& b, const Site& a, const Field& field,
                  const DomainSpec& domain = DomainSpec::full());

// A region of the slab restricted to a spatial window.
struct SlabRegion {
  Box window;
  int R = 1;
  std::vector<std::vector<char>> rows;  // rows[s][flat index]

  bool contains(std::span<const Coord> x, int s) const;
  std::size_t count() const;
  std::vector<SlabSite> sites() const;
};

class DilationTooSmall : public std::runtime_error {
 public:
  DilationTooSmall(Coord given, Coord required);
  Coord required() const { return required_; }

 private:
  Coord required_;
};

struct HitCoupled {
  SlabRegion H, K;
  HittingData hitting;
  ProcessState origin_state;  // xi^o_t
  bool origin_alive = false;
  Coord dilation = 0;
};

Coord required_dilation(const NormalizedModel& model, Coord t);
// An empty (zero-dimensional) window selects the bounding box of the hit sites.
HitCoupled hit_and_coupled_regions(const NormalizedModel& model, const Field& field, Coord t,
                                   const Box& window, std::optional<Coord> dilation = {});
// xi^S_t restricted to a window, from a full slab truncated at the exact dilation.
ProcessState full_slab_restricted(const NormalizedModel& model, const Field& field, Coord t,
                                  const Box& window, Coord origin = 0,
                                  std::optional<Coord> dilation = {});

class DimensionNot2 : public std::invalid_argument {
 public:
  DimensionNot2() : std::invalid_argument("DimensionNot2: operation requires d == 2") {}
};

enum class Side { Left, Right };

struct EdgeTrack {
  Side side = Side::Right;
  std::vector<Coord> values;       // values[t]
  std::vector<char> certified;     // exact regardless of the truncation
  std::optional<Coord> extinct_from;
  Coord truncation = 0;
};

EdgeTrack edge_track(const NormalizedModel& model, const Field& field, Side side, Coord T,
                     double margin = 0.1);

struct TorusOutcome {
  std::optional<Coord> tau;  // nullopt: Survived(T_max)
  Coord T_max = 0;
};

class TorusTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

TorusOutcome torus_extinction(const NormalizedModel& model, const Field& field, Coord n,
                              Coord T_max);

class IrrationalTilt : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class MissingSnapshots : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

Coord tilted_period(const std::vector<Rational>& v, int R);
// Exact rational tilt from real input; IrrationalTilt when no small-denominator match.
std::vector<Rational> rational_tilt(const std::vector<double>& v, std::int64_t max_den = 1000000);

// Tilted quantities as a re-indexing of retained snapshots. Tilted sites are
// addressed by the integer spatial coordinate x at base-row s, i.e. the
// tilted point x - s v.
class TiltedView {
 public:
  TiltedView(const Trajectory& traj, std::vector<Rational> v, int R,
             const Trajectory* full = nullptr);
  Coord period() const { return period_; }
  bool xi_hat(Coord t, std::span<const Coord> x, Coord s) const;
  bool k_hat(Coord t, std::span<const Coord> x, Coord s) const;
  std::optional<Coord> t_hat(std::span<const Coord> x, Coord s) const;
  bool h_hat(Coord t, std::span<const Coord> x, Coord s) const;

 private:
  bool row0(const Trajectory& tr, Coord time, std::span<const Coord> x) const;
  std::vector<Coord> shifted(std::span<const Coord> x, Coord k) const;

  const Trajectory& traj_;
  const Trajectory* full_;
  std::vector<Rational> v_;
  int R_;
  Coord period_;
};

}  // namespace gosp
