#include "affordmap/config.hpp"

#include <fstream>

namespace affordmap {

namespace {

nlohmann::json make_defaults() {
  using nlohmann::json;
  return json{
      {"env",
       {{"task", "reacher"},
        {"segment_length", 0.5},
        {"joint_limit", 1.5707963267948966},
        {"sweep_substeps", 32},
        {"min_obstacles", 0},
        {"max_obstacles", 4},
        {"annulus_inner", 1.5},
        {"annulus_outer", 3.5},
        {"radius_min", 0.3},
        {"radius_max", 0.8},
        {"horizon", 5},
        {"turn_gain", 0.6},
        {"slip_threshold", 1.5},
        {"sigma_slip", 0.3},
        {"sigma_base", 0.02},
        {"noise", true}}},
      {"predictor",
       {{"trunk_hidden", {128, 128}},
        {"head_hidden", {128}},
        {"activation", "tanh"},
        {"gaussian", false},
        {"epochs", 60},
        {"batch_size", 64},
        {"passes_per_epoch", 1},
        {"learning_rate", 1e-3},
        {"lr_decay", 0.97},
        {"sensor_noise", 0.0},
        {"action_noise", 0.0},
        {"patience", 5},
        {"min_relative_improvement", 1e-3},
        {"validation_fraction", 0.1},
        {"warm_start", false}}},
      {"proposer",
       {{"learning_rate", 3e-4},
        {"epochs", 20},
        {"iterations_per_epoch", 500},
        {"patience", 5},
        {"min_relative_improvement", 1e-3},
        {"smoothness", 0.05},
        {"alpha", 0.01},
        {"mode", "hard_min"},
        {"temperature", 0.1},
        {"sign", "penalize"},
        {"tie_trunk", false},
        {"vertex_subsample", 0}}},
      {"trainer",
       {{"seed", nullptr},
        {"cycles", 3},
        {"collect_random", 6667},
        {"collect_proposer", 3000},
        {"sigma_explore", 0.1},
        {"workers", 1}}},
      {"eval", {{"grid_side", 9}, {"trials", 1}, {"r_max", nullptr}, {"seed", 0}}},
  };
}

bool compatible(const nlohmann::json& def, const nlohmann::json& v, const std::string& key) {
  if (key == "trainer.seed") return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (key == "eval.r_max") return v.is_null() || v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) {
    if (!v.is_array()) return false;
    for (const auto& e : v) {
      if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<std::int64_t>() > 0)) return false;
    }
    return true;
  }
  if (def.is_number_integer() || def.is_number_unsigned()) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  }
  if (def.is_number_float()) return v.is_number();
  return false;
}

template <typename T>
T get(const nlohmann::json& j, const char* section, const char* key) {
  return j.at(section).at(key).get<T>();
}

std::vector<std::size_t> widths(const nlohmann::json& j) { return j.get<std::vector<std::size_t>>(); }

}  // namespace

const nlohmann::json& default_config() {
  static const nlohmann::json d = make_defaults();
  return d;
}

RunConfig::RunConfig(const nlohmann::json& user) : json_(default_config()) {
  if (!user.is_object()) throw ConfigError("configuration must be an object of sections");
  for (const auto& [section, body] : user.items()) {
    if (!json_.contains(section)) throw ConfigError("unknown config section '" + section + "'");
    if (!body.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const std::string name = section + "." + key;
      if (!json_[section].contains(key)) throw ConfigError("unknown config key '" + name + "'");
      if (!compatible(json_[section][key], value, name)) {
        throw ConfigError("config key '" + name + "' has the wrong type: " + value.dump());
      }
      json_[section][key] = value;
    }
  }
  if (json_["trainer"]["seed"].is_null()) throw ConfigError("trainer.seed is mandatory");
  const std::string task = json_["env"]["task"];
  if (task != "reacher" && task != "loco") throw ConfigError("env.task must be reacher or loco, got '" + task + "'");
  // surface semantic errors now rather than mid-run
  try {
    auto t = make_task();
    cycle_config().validate();
    (void)eval(*t);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  config[section][key] = value;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  nlohmann::json user = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    try {
      user = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(user, o);
  return RunConfig(user);
}

std::uint64_t RunConfig::seed() const { return json_["trainer"]["seed"].get<std::uint64_t>(); }

std::unique_ptr<env::Task> RunConfig::make_task() const {
  const auto& e = json_.at("env");
  if (e.at("task") == "reacher") {
    env::ReacherParams p;
    p.segment_length = e.at("segment_length");
    p.joint_limit = e.at("joint_limit");
    p.sweep_substeps = e.at("sweep_substeps");
    p.min_obstacles = e.at("min_obstacles");
    p.max_obstacles = e.at("max_obstacles");
    p.annulus_inner = e.at("annulus_inner");
    p.annulus_outer = e.at("annulus_outer");
    p.radius_min = e.at("radius_min");
    p.radius_max = e.at("radius_max");
    if (p.segment_length <= 0 || p.joint_limit <= 0 || p.sweep_substeps == 0 || p.min_obstacles > p.max_obstacles ||
        p.radius_min <= 0 || p.radius_min > p.radius_max || p.annulus_inner > p.annulus_outer) {
      throw ConfigError("inconsistent reacher parameters in section env");
    }
    return std::make_unique<env::ReacherTask>(p);
  }
  env::LocoParams p;
  p.horizon = e.at("horizon");
  p.turn_gain = e.at("turn_gain");
  p.slip_threshold = e.at("slip_threshold");
  p.sigma_slip = e.at("sigma_slip");
  p.sigma_base = e.at("sigma_base");
  p.noise = e.at("noise");
  if (p.horizon == 0 || p.sigma_slip < 0 || p.sigma_base < 0) throw ConfigError("inconsistent loco parameters in env");
  return std::make_unique<env::LocoTask>(p);
}

trainer::CycleConfig RunConfig::cycle_config() const {
  const auto& j = json_;
  trainer::CycleConfig c;
  c.seed = seed();
  c.cycles = get<std::size_t>(j, "trainer", "cycles");
  c.collect_random = get<std::size_t>(j, "trainer", "collect_random");
  c.collect_proposer = get<std::size_t>(j, "trainer", "collect_proposer");
  c.sigma_explore = get<double>(j, "trainer", "sigma_explore");
  c.workers = std::max<std::size_t>(1, get<std::size_t>(j, "trainer", "workers"));

  const auto& p = j.at("predictor");
  c.architecture.trunk_hidden = widths(p.at("trunk_hidden"));
  c.architecture.head_hidden = widths(p.at("head_hidden"));
  c.architecture.activation = diffnet::layer_kind_from_string(p.at("activation").get<std::string>());
  if (c.architecture.activation == diffnet::LayerKind::dense ||
      c.architecture.activation == diffnet::LayerKind::scale_shift) {
    throw ConfigError("predictor.activation must be tanh, relu or sigmoid");
  }
  c.gaussian = p.at("gaussian");
  c.warm_start = p.at("warm_start");
  c.validation_fraction = p.at("validation_fraction");
  c.predictor.epochs = p.at("epochs");
  c.predictor.batch_size = p.at("batch_size");
  c.predictor.passes_per_epoch = p.at("passes_per_epoch");
  c.predictor.learning_rate = p.at("learning_rate");
  c.predictor.lr_decay = p.at("lr_decay");
  c.predictor.sensor_noise = p.at("sensor_noise");
  c.predictor.action_noise = p.at("action_noise");
  c.predictor.patience = p.at("patience");
  c.predictor.min_relative_improvement = p.at("min_relative_improvement");
  if (c.predictor.batch_size == 0 || c.predictor.learning_rate <= 0 || c.predictor.sensor_noise < 0 ||
      c.predictor.action_noise < 0) {
    throw ConfigError("inconsistent predictor training parameters");
  }

  const auto& q = j.at("proposer");
  c.proposer.learning_rate = q.at("learning_rate");
  c.proposer.epochs = q.at("epochs");
  c.proposer.iterations_per_epoch = q.at("iterations_per_epoch");
  c.proposer.patience = q.at("patience");
  c.proposer.min_relative_improvement = q.at("min_relative_improvement");
  c.proposer.loss.smoothness = q.at("smoothness");
  c.proposer.loss.alpha = q.at("alpha");
  c.proposer.loss.mode = proposer::spread_mode_from_string(q.at("mode").get<std::string>());
  c.proposer.loss.temperature = q.at("temperature");
  c.proposer.loss.sign = proposer::uncertainty_sign_from_string(q.at("sign").get<std::string>());
  c.proposer.tie_trunk = q.at("tie_trunk");
  c.proposer.vertex_subsample = q.at("vertex_subsample");
  if (c.proposer.learning_rate < 0) throw ConfigError("proposer.learning_rate must be non-negative");

  c.grid_side = get<std::size_t>(j, "eval", "grid_side");
  c.eval_trials = get<std::size_t>(j, "eval", "trials");
  return c;
}

EvalSettings RunConfig::eval(const env::Task& task) const {
  const auto& e = json_.at("eval");
  EvalSettings s;
  s.grid_side = e.at("grid_side");
  s.trials = e.at("trials");
  s.seed = e.at("seed");
  s.r_max = e.at("r_max").is_null() ? 0.1 * task.reach_scale() : e.at("r_max").get<double>();
  if (s.grid_side < 2 || s.trials == 0 || !(s.r_max > 0)) throw ConfigError("inconsistent eval parameters");
  return s;
}

}  // namespace affordmap
