#pragma once

#include "gosp/rational.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gosp {

using Offset = std::vector<Coord>;

struct NeighborhoodSpec {
  int d = 2;
  std::vector<Offset> offsets;
};

struct SplitOffset {
  std::vector<Coord> y;  // spatial part
  int u = 1;             // time component
};

struct NormalizedModel {
  NeighborhoodSpec spec;  // offsets in lexicographic order
  int R = 1;
  Rational gamma;
  std::vector<SplitOffset> split_offsets;
  std::vector<Coord> reach;  // per spatial axis, max |y_i|

  int dim() const { return spec.d; }
  int spatial_dim() const { return spec.d - 1; }
};

enum class ModelErrorKind {
  BadDimension,
  TooFewOffsets,
  ZeroOffset,
  DuplicateOffset,
  NonPositiveTimeComponent,
  ProperSublattice,
};

const char* to_string(ModelErrorKind kind);

class ModelError : public std::runtime_error {
 public:
  ModelError(ModelErrorKind kind, std::string message, Offset offending = {},
             std::uint64_t index = 0);
  ModelErrorKind kind() const { return kind_; }
  const Offset& offending() const { return offending_; }
  // ProperSublattice: the lattice index, 0 when the rank is deficient.
  std::uint64_t index() const { return index_; }

 private:
  ModelErrorKind kind_;
  Offset offending_;
  std::uint64_t index_;
};

NormalizedModel validate(const NeighborhoodSpec& spec);

// Some u with <x,u> > 0 for every offset, or nullopt when none exists.
std::optional<std::vector<Rational>> orientation_certificate(const NeighborhoodSpec& spec);

// Index of the lattice generated by the offsets; nullopt means infinite (rank < d).
std::optional<std::uint64_t> lattice_index(const NeighborhoodSpec& spec);

NeighborhoodSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NeighborhoodSpec& spec);
NeighborhoodSpec load_model_file(const std::string& path);

// Named neighbourhoods used throughout tests and examples.
NeighborhoodSpec make_spec(int d, std::vector<Offset> offsets);

}  // namespace gosp
