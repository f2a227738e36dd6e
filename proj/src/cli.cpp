#include "gosp/cli.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#ifndef GOSP_VERSION
#define GOSP_VERSION "0.0.0"
#endif

namespace gosp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Kind { Int, Num, Bool, Str, Rat, IntList, NumList, RatList, IntPair, IntPairs, Geometry, Model };

struct Key {
  std::string name;
  Kind kind;
  bool required = false;
  json fallback = nullptr;  // null: optional without default
};

Key req(std::string n, Kind k) { return {std::move(n), k, true, nullptr}; }
Key opt(std::string n, Kind k, json d = nullptr) { return {std::move(n), k, false, std::move(d)}; }

const std::map<std::string, std::vector<Key>>& schemas() {
  static const std::map<std::string, std::vector<Key>> s = [] {
    const std::vector<Key> common{req("model", Kind::Model), req("estimator", Kind::Str),
                                  opt("seed", Kind::Int, 0), opt("threads", Kind::Int, 1)};
    std::map<std::string, std::vector<Key>> m{
        {"simulate", {req("p", Kind::Num), req("T", Kind::Int), opt("reps", Kind::Int, 1)}},
        {"survival", {req("p", Kind::Num), req("T", Kind::Int), req("reps", Kind::Int),
                      opt("dual", Kind::Bool, false)}},
        {"pc", {req("T", Kind::Int), req("reps", Kind::Int), opt("L_stop", Kind::Int, 0),
                opt("tol", Kind::Num, 0.01), opt("stability_seeds", Kind::Int, 3)}},
        {"deathfit", {req("p", Kind::Num), req("T", Kind::Int), req("reps", Kind::Int),
                      opt("window", Kind::IntPair, json::array({10, 50})),
                      opt("min_deaths", Kind::Int, 20)}},
        {"subcrit", {req("p", Kind::Num), req("T", Kind::Int), req("reps", Kind::Int),
                     opt("windows", Kind::IntPairs, json::parse("[[40,60],[60,80]]")),
                     opt("min_count", Kind::Int, 3)}},
        {"torus", {req("p", Kind::Num), req("T", Kind::Int), req("reps", Kind::Int),
                   req("sizes", Kind::IntList), opt("decay_rate", Kind::Num),
                   opt("max_censored", Kind::Num, 0.01)}},
        {"shape", {req("p", Kind::Num), req("T", Kind::Int), req("reps", Kind::Int),
                   opt("grid", Kind::Int, 8), opt("T_cond", Kind::Int), opt("eps", Kind::Num, 0.1),
                   opt("min_acceptance", Kind::Num, 0.05)}},
        {"edges", {req("p", Kind::Num), req("T", Kind::Int), req("reps", Kind::Int)}},
        {"density", {req("p", Kind::Num), req("T", Kind::Int), req("reps", Kind::Int),
                     req("n", Kind::IntList), opt("levels", Kind::NumList, json::array({0.5}))}},
        {"crossing", {req("p", Kind::Num), req("reps", Kind::Int), req("L", Kind::Int),
                      opt("eps", Kind::Num, 0.2), req("slope", Kind::Rat)}},
        {"bgprobe", {req("p", Kind::Num), req("reps", Kind::Int), req("geometry", Kind::Geometry),
                     req("n", Kind::Int)}},
        {"goodblock", {req("p", Kind::Num), req("reps", Kind::Int), req("L", Kind::Int),
                       req("C", Kind::Int), req("v", Kind::RatList)}},
        {"meet", {req("p", Kind::Num), req("T", Kind::Int), req("reps", Kind::Int),
                  req("v", Kind::RatList)}},
        {"cone", {req("p", Kind::Num), req("T", Kind::Int), req("reps", Kind::Int),
                  req("cone", Kind::RatList), req("t0", Kind::Int), opt("U", Kind::NumList)}},
        {"crosspath", {req("p", Kind::Num), req("reps", Kind::Int), req("L", Kind::Int),
                       opt("eps", Kind::Num, 0.0), opt("box_eps", Kind::Num, 0.1),
                       req("alpha", Kind::Rat), req("beta", Kind::Rat), opt("n", Kind::Int, 1),
                       opt("retry", Kind::Int, 20)}},
    };
    for (auto& [name, keys] : m) keys.insert(keys.begin(), common.begin(), common.end());
    return m;
  }();
  return s;
}

bool is_rational(const json& v) {
  if (v.is_number_integer()) return true;
  if (!v.is_string()) return false;
  try {
    parse_rational(v.get<std::string>());
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void check_kind(const json& v, Kind k, const std::string& ptr) {
  auto fail = [&](const char* want) { throw SchemaError(ptr, std::string("expected ") + want); };
  auto int_list = [&](const json& a, std::size_t n, const std::string& p) {
    if (!a.is_array() || (n && a.size() != n)) throw SchemaError(p, "expected an integer array");
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!a[i].is_number_integer()) throw SchemaError(p + "/" + std::to_string(i), "expected an integer");
  };
  switch (k) {
    case Kind::Int:
      if (!v.is_number_integer()) fail("an integer");
      break;
    case Kind::Num:
      if (!v.is_number()) fail("a number");
      break;
    case Kind::Bool:
      if (!v.is_boolean()) fail("a boolean");
      break;
    case Kind::Str:
      if (!v.is_string()) fail("a string");
      break;
    case Kind::Rat:
      if (!is_rational(v)) fail("a rational (integer or \"p/q\")");
      break;
    case Kind::IntList: int_list(v, 0, ptr); break;
    case Kind::IntPair: int_list(v, 2, ptr); break;
    case Kind::NumList:
      if (!v.is_array()) fail("a number array");
      for (std::size_t i = 0; i < v.size(); ++i)
        if (!v[i].is_number()) throw SchemaError(ptr + "/" + std::to_string(i), "expected a number");
      break;
    case Kind::RatList:
      if (!v.is_array()) fail("a rational array");
      for (std::size_t i = 0; i < v.size(); ++i)
        if (!is_rational(v[i])) throw SchemaError(ptr + "/" + std::to_string(i), "expected a rational");
      break;
    case Kind::IntPairs:
      if (!v.is_array()) fail("an array of integer pairs");
      for (std::size_t i = 0; i < v.size(); ++i) int_list(v[i], 2, ptr + "/" + std::to_string(i));
      break;
    case Kind::Geometry:
      try {
        geometry_from_json(v);
      } catch (const std::exception& e) {
        throw SchemaError(ptr, e.what());
      }
      break;
    case Kind::Model:
      if (!v.is_string() && !v.is_object()) fail("a model file path or an inline model");
      break;
  }
}

Rational rat(const json& v) {
  return v.is_string() ? parse_rational(v.get<std::string>()) : Rational(v.get<Coord>());
}
std::vector<Rational> rats(const json& v) {
  std::vector<Rational> out;
  for (const auto& e : v) out.push_back(rat(e));
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes via a .partial file renamed into place.
void write_final(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Shortest text that reads back to the same double.
std::string num(double x) {
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

Report dispatch(const Plan& plan, int threads) {
  const json& c = plan.config;
  const NormalizedModel& m = plan.model;
  const Run run{plan.seed, threads};
  const std::string& e = plan.estimator;
  auto I = [&](const char* k) { return c.at(k).get<Coord>(); };
  auto N = [&](const char* k) { return c.at(k).get<double>(); };
  const std::uint64_t reps = plan.reps;

  if (e == "simulate") {
    Report r;
    const Coord T = I("T");
    std::uint64_t alive = 0;
    for (std::uint64_t i = 0; i < reps; ++i) {
      auto tr = evolve(m, {SlabSite{std::vector<Coord>(m.spatial_dim(), 0), 0}},
                       replica_field(m, N("p"), plan.seed, i), DomainSpec::full(), T);
      alive += tr.survived();
      r.records.push_back({{"replica", i}, {"tau", tr.tau ? json(*tr.tau) : json(nullptr)},
                           {"counts", tr.counts}});
    }
    r.summary.push_back({"simulate", N("p"), T, reps, proportion(alive, reps), plan.seed});
    return r;
  }
  if (e == "survival")
    return (c.at("dual").get<bool>() ? dual_survival_curve(m, N("p"), I("T"), reps, run)
                                     : survival_curve(m, N("p"), I("T"), reps, run))
        .report;
  if (e == "pc")
    return critical_point(m, I("T"), I("L_stop"), reps, N("tol"), run,
                          static_cast<int>(I("stability_seeds")))
        .report;
  if (e == "deathfit") {
    auto w = c.at("window").get<std::vector<Coord>>();
    return death_bound_fit(m, N("p"), I("T"), reps, w[0], w[1], run,
                           c.at("min_deaths").get<std::uint64_t>())
        .report;
  }
  if (e == "subcrit") {
    std::vector<std::pair<Coord, Coord>> ws;
    for (const auto& w : c.at("windows")) ws.emplace_back(w[0].get<Coord>(), w[1].get<Coord>());
    return subcritical_decay(m, N("p"), I("T"), reps, run, ws, c.at("min_count").get<std::uint64_t>())
        .report;
  }
  if (e == "torus") {
    std::optional<double> rate;
    if (c.contains("decay_rate")) rate = N("decay_rate");
    return torus_stats(m, N("p"), c.at("sizes").get<std::vector<Coord>>(), reps, I("T"), run, rate,
                       N("max_censored"))
        .report;
  }
  if (e == "shape") {
    const Coord T_cond = c.contains("T_cond") ? I("T_cond") : I("T");
    return shape_and_time_constants(m, N("p"), I("T"), reps, static_cast<int>(I("grid")), T_cond, run,
                                    N("eps"), N("min_acceptance"))
        .report;
  }
  if (e == "edges") return edge_speeds(m, N("p"), I("T"), reps, run).report;
  if (e == "density")
    return density_spectrum(m, N("p"), c.at("n").get<std::vector<Coord>>(), I("T"), reps,
                            c.at("levels").get<std::vector<double>>(), run)
        .report;
  if (e == "crossing")
    return crossing_probability(m, N("p"), I("L"), N("eps"), rat(c.at("slope")), reps, run).report;
  if (e == "bgprobe")
    return bg_event_probability(m, N("p"), geometry_from_json(c.at("geometry")), I("n"), reps, run).report;
  if (e == "goodblock")
    return good_block_probability(m, N("p"), I("L"), I("C"), rats(c.at("v")), reps, run).report;
  if (e == "meet") return primal_dual_meet(m, N("p"), I("T"), reps, rats(c.at("v")), run).report;
  if (e == "cone") {
    auto ends = rats(c.at("cone"));
    if (m.dim() != 2 || ends.size() != 2)
      throw SchemaError("/cone", "the CLI takes interval cones [lo, hi] for d = 2");
    Polytope O = Polytope::interval(ends[0], ends[1]);
    std::optional<ShapeEstimate> shape;
    if (c.contains("U")) {
      auto u = c.at("U").get<std::vector<double>>();
      if (u.size() != 2) throw SchemaError("/U", "expected [left, right]");
      shape.emplace();
      shape->directions = {{1.0}, {-1.0}};
      shape->support = {u[1], -u[0]};
    }
    return restricted_cone_survival(m, N("p"), O, I("T"), I("t0"), reps, run,
                                    shape ? &*shape : nullptr)
        .report;
  }
  if (e == "crosspath") {
    TransferGeometry g{I("L"), N("box_eps"), rat(c.at("alpha")), rat(c.at("beta")), I("n")};
    return path_crossing_transfer(m, N("p"), N("eps"), g, reps, run, c.at("retry").get<std::uint64_t>())
        .report;
  }
  throw std::logic_error("no dispatch for estimator " + e);
}

}  // namespace

const std::vector<std::string>& estimator_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : schemas()) v.push_back(k);
    return v;
  }();
  return names;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

Plan plan_from_json(const json& config, const fs::path& base_dir) {
  if (!config.is_object()) throw SchemaError("", "config must be an object");
  if (!config.contains("estimator")) throw SchemaError("/estimator", "missing required key");
  if (!config.at("estimator").is_string()) throw SchemaError("/estimator", "expected a string");
  Plan plan;
  plan.estimator = config.at("estimator").get<std::string>();
  auto it = schemas().find(plan.estimator);
  if (it == schemas().end()) throw SchemaError("/estimator", "unknown estimator \"" + plan.estimator + "\"");
  const auto& keys = it->second;
  for (auto kv = config.begin(); kv != config.end(); ++kv) {
    bool known = std::any_of(keys.begin(), keys.end(), [&](const Key& k) { return k.name == kv.key(); });
    if (!known) throw SchemaError("/" + kv.key(), "unknown key for estimator " + plan.estimator);
  }
  plan.config = json::object();
  for (const auto& k : keys) {
    if (config.contains(k.name)) {
      check_kind(config.at(k.name), k.kind, "/" + k.name);
      plan.config[k.name] = config.at(k.name);
    } else if (k.required) {
      throw SchemaError("/" + k.name, "missing required key");
    } else if (!k.fallback.is_null()) {
      plan.config[k.name] = k.fallback;
    }
  }
  for (const char* k : {"reps", "T", "seed", "threads"})
    if (plan.config.contains(k) && plan.config.at(k).get<std::int64_t>() < 0)
      throw SchemaError(std::string("/") + k, "must be non-negative");
  if (plan.config.contains("p")) {
    double p = plan.config.at("p").get<double>();
    if (!(p >= 0 && p <= 1)) throw SchemaError("/p", "must lie in [0, 1]");
  }

  const json& mj = plan.config.at("model");
  std::string canonical;
  if (mj.is_string()) {
    fs::path mp = mj.get<std::string>();
    if (mp.is_relative() && !base_dir.empty()) mp = base_dir / mp;
    canonical = read_file(mp);
    try {
      plan.spec = spec_from_json(json::parse(canonical));
    } catch (const json::exception& e) {
      throw SchemaError("/model", e.what());
    } catch (const std::invalid_argument& e) {
      throw SchemaError("/model", e.what());
    }
  } else {
    try {
      plan.spec = spec_from_json(mj);
    } catch (const std::exception& e) {
      throw SchemaError("/model", e.what());
    }
    canonical = mj.dump();
  }
  plan.model_hash = "sha256:" + sha256_hex(canonical);
  plan.model = validate(plan.spec);  // ModelError propagates
  plan.seed = plan.config.at("seed").get<std::uint64_t>();
  plan.reps = plan.config.at("reps").get<std::uint64_t>();
  return plan;
}

Plan parse_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  return plan_from_json(j, path.parent_path());
}

Plan plan_from_manifest(const fs::path& path) {
  json man = json::parse(read_file(path));
  json config = man.at("config");
  const std::string recorded = man.at("model_hash").get<std::string>();
  config["model"] = man.at("model_spec");
  Plan plan = plan_from_json(config);
  plan.model_hash = recorded;
  plan.config["model"] = man.at("config").at("model");
  if (man.at("mixer").get<std::string>() != kMixerId)
    throw std::runtime_error("manifest was written with mixer " + man.at("mixer").get<std::string>());
  return plan;
}

int run(const Plan& plan, int threads, const fs::path& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  json man = {{"software", {{"name", "gosp"}, {"version", GOSP_VERSION}}},
              {"mixer", kMixerId},
              {"estimator", plan.estimator},
              {"model_hash", plan.model_hash},
              {"model_spec", to_json(plan.spec)},
              {"config", plan.config},
              {"seed", plan.seed},
              {"reps", plan.reps},
              {"parallelism", threads},
              {"status", "running"}};
  write_final(out_dir / "manifest.json", man.dump(2) + "\n");

  const auto t0 = std::chrono::steady_clock::now();
  auto finish = [&](const char* status) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    man["status"] = status;
    man["timing"] = {{"wall_seconds", secs},
                     {"per_replica_seconds", plan.reps ? secs / static_cast<double>(plan.reps) : 0.0}};
    write_final(out_dir / "manifest.json", man.dump(2) + "\n");
  };
  Report rep;
  try {
    rep = dispatch(plan, threads);
  } catch (const Refusal& r) {
    man["refusal"] = {{"kind", r.kind()}, {"message", r.what()}};
    finish("refused");
    log << r.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    man["error"] = e.what();
    finish("failed");
    throw;
  }

  std::string lines;
  for (const auto& r : rep.records) lines += r.dump() + "\n";
  write_final(out_dir / "results.jsonl", lines);
  std::string csv = "estimator,p,T,reps,mean,stderr,ci_lo,ci_hi,seed\n";
  for (const auto& s : rep.summary)
    csv += s.estimator + "," + num(s.p) + "," + std::to_string(s.T) + "," + std::to_string(s.reps) + "," +
           num(s.est.mean) + "," + num(s.est.stderr_) + "," + num(s.est.ci_lo) + "," + num(s.est.ci_hi) +
           "," + std::to_string(s.seed) + "\n";
  write_final(out_dir / "details.json", rep.details.dump(2) + "\n");
  write_final(out_dir / "summary.csv", csv);
  finish("complete");
  for (const auto& s : rep.summary)
    log << s.estimator << ": " << num(s.est.mean) << " +- " << num(s.est.stderr_) << "\n";
  return 0;
}

namespace {

json flag_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalised oriented site percolation: simulation and estimators"};
  app.require_subcommand(1);

  std::string model_path;
  auto* val = app.add_subcommand("validate", "Check a neighbourhood and print its normalised form");
  val->add_option("--model", model_path, "Model file")->required();

  std::string manifest_path, out_dir;
  int threads = -1;
  auto* rerun = app.add_subcommand("rerun", "Repeat an experiment from its manifest");
  rerun->add_option("--manifest", manifest_path)->required();
  rerun->add_option("--out", out_dir)->required();
  rerun->add_option("--threads", threads);

  struct Sub {
    CLI::App* app;
    std::string config;
    std::map<std::string, std::string> values;
  };
  std::map<std::string, Sub> subs;
  for (const auto& [name, keys] : schemas()) {
    auto& s = subs[name];
    s.app = app.add_subcommand(name, "Run the " + name + " estimator");
    s.app->add_option("--config", s.config, "Experiment config (flags override its keys)");
    s.app->add_option("--out", out_dir, "Output directory")->required();
    for (const auto& k : keys)
      if (k.name != "estimator") s.app->add_option("--" + k.name, s.values[k.name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (val->parsed()) {
      auto spec = load_model_file(model_path);
      auto m = validate(spec);
      json out = {{"d", m.spec.d},
                  {"X", m.spec.offsets},
                  {"R", m.R},
                  {"gamma", to_string(m.gamma)},
                  {"reach", m.reach}};
      if (auto u = orientation_certificate(m.spec)) {
        std::vector<std::string> cert;
        for (const auto& r : *u) cert.push_back(to_string(r));
        out["orientation"] = cert;
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (rerun->parsed()) {
      Plan plan = plan_from_manifest(manifest_path);
      int t = threads > 0 ? threads : plan.config.at("threads").get<int>();
      return run(plan, t, out_dir, std::cerr);
    }
    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      json config = json::object();
      fs::path base;
      if (!s.config.empty()) {
        config = json::parse(read_file(s.config));
        base = fs::path(s.config).parent_path();
      }
      config["estimator"] = name;
      for (const auto& [k, text] : s.values) {
        if (s.app->count("--" + k) == 0) continue;
        config[k] = k == "model" ? json(fs::absolute(text).string()) : flag_value(text);
      }
      Plan plan = plan_from_json(config, base);
      return run(plan, plan.config.at("threads").get<int>(), out_dir, std::cerr);
    }
  } catch (const SchemaError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "ModelInvalid: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace gosp::cli
