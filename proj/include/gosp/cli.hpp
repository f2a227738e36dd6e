#pragma once

#include "gosp/estimators.hpp"
#include "gosp/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace gosp::cli {

// Config rejected by the schema; pointer is a JSON pointer into the config.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : std::runtime_error("SchemaError at " + pointer + ": " + what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct Plan {
  std::string estimator;
  nlohmann::json config;        // validated, defaults filled in
  NeighborhoodSpec spec;
  NormalizedModel model;
  std::string model_hash;       // sha256 of the model file, or of the inline model's JSON
  std::uint64_t seed = 0;
  std::uint64_t reps = 0;
};

const std::vector<std::string>& estimator_names();

// Validates a config object. A string "model" is resolved against base_dir.
Plan plan_from_json(const nlohmann::json& config, const std::filesystem::path& base_dir = {});
Plan parse_config(const std::filesystem::path& path);
// The plan recorded in a manifest written by run().
Plan plan_from_manifest(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

// Writes manifest.json, results.jsonl and summary.csv under out_dir. Returns
// the process exit code: 0 on success, 2 on refusal.
int run(const Plan& plan, int threads, const std::filesystem::path& out_dir, std::ostream& log);

int main(int argc, char** argv);

}  // namespace gosp::cli
