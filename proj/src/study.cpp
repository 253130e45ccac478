#include "sparsecoll/study.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "sparsecoll/adaptive.hpp"
#include "sparsecoll/gauss.hpp"
#include "sparsecoll/parallel.hpp"
#include "sparsecoll/postproc.hpp"
#include "sparsecoll/surrogate_io.hpp"

#ifndef SPARSECOLL_VERSION
#define SPARSECOLL_VERSION "unknown"
#endif

namespace sparsecoll {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// JSON pointer -> source line, recorded while parsing.

// Input iterator that remembers the last character handed to the parser.
struct TrackingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  const char** last = nullptr;

  reference operator*() const { return *p; }
  TrackingIterator& operator++() {
    *last = p;
    ++p;
    return *this;
  }
  TrackingIterator operator++(int) {
    TrackingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const TrackingIterator& o) const { return p == o.p; }
  bool operator!=(const TrackingIterator& o) const { return p != o.p; }
};

class LocatedJson {
 public:
  LocatedJson(const std::string& text, const std::string& source) : text_(text), source_(source) {
    const char* last = text_.data();
    TrackingIterator first{text_.data(), &last};
    TrackingIterator end{text_.data() + text_.size(), &last};

    struct Frame {
      bool array;
      std::string path;
      std::string key;
      std::size_t index = 0;
    };
    std::vector<Frame> stack;
    auto line_now = [&] { return 1 + static_cast<int>(std::count(static_cast<const char*>(text_.data()), last, '\n')); };
    auto child_path = [&]() -> std::string {
      if (stack.empty()) return "";
      const Frame& top = stack.back();
      return top.array ? top.path + "/" + std::to_string(top.index) : top.path + "/" + top.key;
    };

    json::parser_callback_t cb = [&](int, json::parse_event_t event, json& parsed) {
      switch (event) {
        case json::parse_event_t::object_start:
        case json::parse_event_t::array_start: {
          std::string path = child_path();
          lines_.emplace(path, line_now());
          stack.push_back({event == json::parse_event_t::array_start, path, "", 0});
          break;
        }
        case json::parse_event_t::key:
          stack.back().key = parsed.get<std::string>();
          lines_.emplace(stack.back().path + "/" + stack.back().key, line_now());
          break;
        case json::parse_event_t::value:
          if (!stack.empty() && stack.back().array) {
            lines_.emplace(child_path(), line_now());
            ++stack.back().index;
          }
          break;
        case json::parse_event_t::object_end:
        case json::parse_event_t::array_end:
          stack.pop_back();
          if (!stack.empty() && stack.back().array) ++stack.back().index;
          break;
      }
      return true;
    };

    try {
      doc_ = json::parse(first, end, cb);
    } catch (const json::parse_error& e) {
      const auto upto = std::min<std::size_t>(e.byte, text_.size());
      const int line = 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(upto), '\n'));
      std::string what = e.what();
      throw ConfigError(fmt::format("{}:{}: invalid JSON: {}", source_, line, what));
    }
  }

  const json& doc() const { return doc_; }

  int line(std::string pointer) const {
    while (true) {
      const auto it = lines_.find(pointer);
      if (it != lines_.end()) return it->second;
      const auto slash = pointer.rfind('/');
      if (slash == std::string::npos) return 1;
      pointer.erase(slash);
    }
  }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    throw ConfigError(fmt::format("{}:{}: {}", source_, line(pointer), message));
  }

 private:
  std::string text_;
  std::string source_;
  json doc_;
  std::map<std::string, int> lines_;
};

// Typed field access.

class Reader {
 public:
  explicit Reader(const LocatedJson& src) : src_(src) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const { src_.fail(ptr, msg); }

  const json& at(const std::string& ptr) const { return src_.doc().at(json::json_pointer(ptr)); }
  bool has(const std::string& ptr) const { return src_.doc().contains(json::json_pointer(ptr)); }

  void only_keys(const std::string& ptr, const std::set<std::string>& allowed) const {
    const json& obj = ptr.empty() ? src_.doc() : at(ptr);
    if (!obj.is_object()) fail(ptr, "'" + name(ptr) + "' must be an object");
    for (const auto& item : obj.items()) {
      if (!allowed.count(item.key())) fail(ptr + "/" + item.key(), "unknown key '" + item.key() + "'");
    }
  }

  double number(const std::string& ptr) const {
    const json& v = at(ptr);
    if (!v.is_number()) fail(ptr, "'" + name(ptr) + "' must be a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& ptr) const {
    const json& v = at(ptr);
    if (!v.is_number_integer()) fail(ptr, "'" + name(ptr) + "' must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& ptr) const {
    const json& v = at(ptr);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(ptr, "'" + name(ptr) + "' must be a non-negative integer");
  }

  std::string string(const std::string& ptr) const {
    const json& v = at(ptr);
    if (!v.is_string()) fail(ptr, "'" + name(ptr) + "' must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& ptr) const {
    const json& v = at(ptr);
    if (!v.is_boolean()) fail(ptr, "'" + name(ptr) + "' must be true or false");
    return v.get<bool>();
  }

 private:
  static std::string name(const std::string& ptr) {
    const auto slash = ptr.rfind('/');
    return slash == std::string::npos ? ptr : ptr.substr(slash + 1);
  }

  const LocatedJson& src_;
};

bool is_waveguide(const std::string& model) { return model == "waveguide"; }

bool needs_model(const std::string& study) { return study != "nodes"; }
bool one_dimensional(const std::string& study) {
  return study == "nodes" || study == "quad-1d" || study == "interp-1d";
}
bool uses_surrogate(const std::string& study) {
  return study == "adapt" || study == "moments" || study == "sobol" || study == "cv-error";
}

std::vector<BoundedDistribution> parse_inputs(const Reader& r, const std::string& ptr, const StudyConfig& cfg,
                                              const ParametricModel* model, std::vector<std::string>* names) {
  const json& arr = r.at(ptr);
  if (!arr.is_array() || arr.empty()) r.fail(ptr, "'" + ptr.substr(1) + "' must be a non-empty array");
  std::vector<BoundedDistribution> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = ptr + "/" + std::to_string(i);
    r.only_keys(p, {"name", "kind", "a", "b", "alpha", "beta"});
    std::string name = r.has(p + "/name") ? r.string(p + "/name") : "y" + std::to_string(i + 1);
    if (names) names->push_back(name);
    const std::string kind_name = r.has(p + "/kind") ? r.string(p + "/kind") : "uniform";
    DistributionKind kind;
    try {
      kind = distribution_kind_from_string(kind_name);
    } catch (const InvalidArgument&) {
      r.fail(p + "/kind", "unknown distribution kind '" + kind_name + "' (expected uniform or beta)");
    }
    double a = 0.0;
    double b = 0.0;
    const bool have_default = model && i < model->dim();
    if (r.has(p + "/a")) {
      a = r.number(p + "/a");
    } else if (have_default) {
      a = model->lower[i];
    } else {
      r.fail(p, "input " + std::to_string(i) + " needs a lower bound 'a'");
    }
    if (r.has(p + "/b")) {
      b = r.number(p + "/b");
    } else if (have_default) {
      b = model->upper[i];
    } else {
      r.fail(p, "input " + std::to_string(i) + " needs an upper bound 'b'");
    }
    try {
      if (kind == DistributionKind::Uniform) {
        if (r.has(p + "/alpha") || r.has(p + "/beta")) r.fail(p, "uniform inputs take no shape parameters");
        out.push_back(BoundedDistribution::uniform(a, b));
      } else {
        if (!r.has(p + "/alpha") || !r.has(p + "/beta")) r.fail(p, "beta inputs need 'alpha' and 'beta'");
        out.push_back(BoundedDistribution::beta(r.number(p + "/alpha"), r.number(p + "/beta"), a, b));
      }
      if (cfg.rule == RuleFamily::Leja) (void)UnivariateRule::leja(out.back());
    } catch (const InvalidArgument& e) {
      r.fail(p, e.what());
    }
  }
  return out;
}

}  // namespace

ParametricModel make_model(const StudyConfig& cfg) {
  if (is_waveguide(cfg.model_name)) return waveguide_model(cfg.frequency_ghz, cfg.input_names, cfg.fixed);
  return test_function(cfg.model_name, cfg.input_names.size());
}

StudyConfig parse_study_config(const std::string& study, const std::string& text, const std::string& source_name,
                               const std::string& base_dir) {
  if (std::find(study_kinds().begin(), study_kinds().end(), study) == study_kinds().end()) {
    throw ConfigError("unknown study '" + study + "'");
  }
  const LocatedJson src(text, source_name);
  const Reader r(src);
  if (!src.doc().is_object()) r.fail("", "configuration must be a JSON object");
  r.only_keys("", {"model", "inputs", "rule", "max_level", "budget", "tolerance", "max_level_per_dim", "samples",
                   "cv_samples", "cv_inputs", "reference", "seed", "surrogate_file", "save_surrogate", "comment"});

  StudyConfig cfg;
  cfg.study = study;
  cfg.raw = src.doc();

  if (r.has("/rule")) {
    const auto name = r.string("/rule");
    try {
      cfg.rule = rule_family_from_string(name);
    } catch (const InvalidArgument&) {
      r.fail("/rule", "unknown rule '" + name + "' (expected clenshaw-curtis or leja)");
    }
  }

  // Model.
  if (r.has("/model")) {
    const json& m = r.at("/model");
    if (m.is_string()) {
      cfg.model_name = m.get<std::string>();
    } else {
      r.only_keys("/model", {"name", "frequency_ghz", "fixed"});
      if (!r.has("/model/name")) r.fail("/model", "model needs a 'name'");
      cfg.model_name = r.string("/model/name");
      if (r.has("/model/frequency_ghz")) {
        if (!is_waveguide(cfg.model_name)) r.fail("/model/frequency_ghz", "only the waveguide takes a frequency");
        cfg.frequency_ghz = r.number("/model/frequency_ghz");
        if (!(cfg.frequency_ghz > 0)) r.fail("/model/frequency_ghz", "frequency must be positive");
      }
      if (r.has("/model/fixed")) {
        if (!is_waveguide(cfg.model_name)) r.fail("/model/fixed", "only the waveguide takes fixed parameters");
        r.only_keys("/model/fixed", {"w", "h", "l", "d", "eps_r", "mu_r"});
        for (const auto& item : r.at("/model/fixed").items()) {
          cfg.fixed[item.key()] = r.number("/model/fixed/" + item.key());
        }
      }
    }
    const auto names = test_function_names();
    if (!is_waveguide(cfg.model_name) && std::find(names.begin(), names.end(), cfg.model_name) == names.end()) {
      r.fail("/model", "unknown model '" + cfg.model_name + "'");
    }
  }

  if (r.has("/surrogate_file")) {
    if (!uses_surrogate(study) || study == "adapt") r.fail("/surrogate_file", "'" + study + "' does not load a surrogate");
    fs::path p = r.string("/surrogate_file");
    if (p.is_relative()) p = fs::path(base_dir) / p;
    if (!fs::exists(p)) r.fail("/surrogate_file", "surrogate file " + p.string() + " does not exist");
    cfg.surrogate_file = p.string();
  }

  const bool model_required = needs_model(study) && !(cfg.surrogate_file.size() && study != "cv-error");
  if (model_required && cfg.model_name.empty()) r.fail("", "'" + study + "' needs a 'model'");

  // Inputs; waveguide inputs name the parameters they perturb.
  std::optional<ParametricModel> model;
  if (r.has("/inputs")) {
    const json& arr = r.at("/inputs");
    if (!arr.is_array() || arr.empty()) r.fail("/inputs", "'inputs' must be a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = "/inputs/" + std::to_string(i);
      if (!arr[i].is_object()) r.fail(p, "each input must be an object");
      if (r.has(p + "/name")) {
        cfg.input_names.push_back(r.string(p + "/name"));
      } else if (is_waveguide(cfg.model_name)) {
        r.fail(p, "waveguide inputs need a 'name' (one of w, h, l, d, eps_r, mu_r)");
      } else {
        cfg.input_names.push_back("y" + std::to_string(i + 1));
      }
    }
    if (!cfg.model_name.empty()) {
      try {
        model = make_model(cfg);
      } catch (const InvalidArgument& e) {
        r.fail("/inputs", e.what());
      }
    }
    cfg.input_names.clear();
    cfg.inputs = parse_inputs(r, "/inputs", cfg, model ? &*model : nullptr, &cfg.input_names);
  } else if (cfg.surrogate_file.empty()) {
    r.fail("", "'" + study + "' needs 'inputs'");
  }
  if (one_dimensional(study) && cfg.inputs.size() != 1) {
    r.fail("/inputs", "'" + study + "' takes exactly one input");
  }

  if (r.has("/cv_inputs")) {
    cfg.cv_inputs = parse_inputs(r, "/cv_inputs", cfg, model ? &*model : nullptr, nullptr);
    const std::size_t dim = cfg.inputs.empty() ? cfg.cv_inputs.size() : cfg.inputs.size();
    if (cfg.cv_inputs.size() != dim) r.fail("/cv_inputs", "'cv_inputs' must match the number of inputs");
  }

  if (r.has("/max_level")) {
    const auto v = r.integer("/max_level");
    if (v < 0 || v > 30) r.fail("/max_level", "'max_level' must lie in [0, 30]");
    if (cfg.rule == RuleFamily::ClenshawCurtis && v > 20) r.fail("/max_level", "Clenshaw-Curtis levels above 20 are not supported");
    cfg.max_level = static_cast<int>(v);
  }
  if (r.has("/budget")) {
    const auto v = r.integer("/budget");
    if (v < 1) r.fail("/budget", "'budget' must be at least 1");
    cfg.budget = static_cast<std::size_t>(v);
  }
  if (r.has("/tolerance")) {
    cfg.tolerance = r.number("/tolerance");
    if (!(cfg.tolerance >= 0)) r.fail("/tolerance", "'tolerance' must be non-negative");
  }
  if (r.has("/max_level_per_dim")) {
    const auto v = r.integer("/max_level_per_dim");
    if (v < 1 || v > 30) r.fail("/max_level_per_dim", "'max_level_per_dim' must lie in [1, 30]");
    cfg.max_level_per_dim = static_cast<int>(v);
  }
  const bool builds_surrogate = uses_surrogate(study) && cfg.surrogate_file.empty();
  if (builds_surrogate && !cfg.budget && !(cfg.tolerance > 0)) {
    r.fail("", "'" + study + "' needs a 'budget' or a positive 'tolerance'");
  }

  cfg.samples = study == "sobol" ? 16384 : study == "moments" ? 10000 : 0;
  if (r.has("/samples")) cfg.samples = r.unsigned_integer("/samples");
  if (study == "sobol" && cfg.samples < 100) r.fail("/samples", "Sobol analysis needs 'samples' >= 100");
  if (study == "moments" && cfg.samples == 1) r.fail("/samples", "Monte Carlo needs 'samples' >= 2 (or 0 to skip)");

  cfg.cv_samples = study == "cv-error" ? 10000 : study == "interp-1d" ? 1000 : 0;
  if (r.has("/cv_samples")) cfg.cv_samples = r.unsigned_integer("/cv_samples");
  if ((study == "cv-error" || study == "interp-1d") && cfg.cv_samples < 1) {
    r.fail("/cv_samples", "'cv_samples' must be at least 1");
  }
  if (cfg.cv_samples > 0 && cfg.model_name.empty()) r.fail("/cv_samples", "cross-validation needs a 'model'");

  if (study == "quad-1d") cfg.reference.source = ReferenceSpec::Source::Gauss;
  if (r.has("/reference")) {
    const std::string p = "/reference";
    r.only_keys(p, {"method", "mean", "variance", "skewness", "points", "tolerance", "budget"});
    const std::string method = r.has(p + "/method") ? r.string(p + "/method") : "values";
    if (method == "values") {
      cfg.reference.source = ReferenceSpec::Source::Values;
      if (r.has(p + "/mean")) cfg.reference.mean = r.number(p + "/mean");
      if (r.has(p + "/variance")) cfg.reference.variance = r.number(p + "/variance");
      if (r.has(p + "/skewness")) cfg.reference.skewness = r.number(p + "/skewness");
    } else if (method == "gauss") {
      if (cfg.inputs.size() != 1) r.fail(p + "/method", "Gauss references are univariate");
      cfg.reference.source = ReferenceSpec::Source::Gauss;
      if (r.has(p + "/points")) {
        const auto v = r.integer(p + "/points");
        if (v < 1 || v > 1000) r.fail(p + "/points", "'points' must lie in [1, 1000]");
        cfg.reference.gauss_points = static_cast<int>(v);
      }
    } else if (method == "adaptive") {
      if (cfg.model_name.empty()) r.fail(p, "an adaptive reference needs a 'model'");
      cfg.reference.source = ReferenceSpec::Source::Adaptive;
      if (r.has(p + "/tolerance")) cfg.reference.adaptive_tolerance = r.number(p + "/tolerance");
      if (r.has(p + "/budget")) {
        const auto v = r.integer(p + "/budget");
        if (v < 1) r.fail(p + "/budget", "'budget' must be at least 1");
        cfg.reference.adaptive_budget = static_cast<std::size_t>(v);
      }
      if (!(cfg.reference.adaptive_tolerance >= 0)) r.fail(p + "/tolerance", "'tolerance' must be non-negative");
    } else {
      r.fail(p + "/method", "unknown reference method '" + method + "' (expected values, gauss or adaptive)");
    }
  }

  if (r.has("/seed")) cfg.seed = r.unsigned_integer("/seed");
  if (r.has("/save_surrogate")) {
    cfg.save_surrogate = r.boolean("/save_surrogate");
    if (cfg.save_surrogate && !builds_surrogate) r.fail("/save_surrogate", "'" + study + "' builds no surrogate to save");
  }
  return cfg;
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }
std::string num(std::optional<double> v) { return v ? num(*v) : std::string(); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += quote(cells[i]);
    }
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }
  std::string text_;
};

std::optional<double> abs_err(double estimate, std::optional<double> reference) {
  if (!reference) return std::nullopt;
  return error_metrics(estimate, *reference).eps_abs;
}

struct Reference {
  std::optional<double> mean;
  std::optional<double> variance;
  std::optional<double> skewness;
  std::size_t evaluations = 0;
};

json reference_json(const Reference& ref) {
  json j = json::object();
  if (ref.mean) j["mean"] = *ref.mean;
  if (ref.variance) j["variance"] = *ref.variance;
  if (ref.skewness) j["skewness"] = *ref.skewness;
  if (ref.evaluations) j["evaluations"] = ref.evaluations;
  return j;
}

std::vector<UnivariateRule> make_rules(const StudyConfig& cfg, const std::vector<BoundedDistribution>& dists) {
  std::vector<UnivariateRule> rules;
  for (const auto& d : dists) {
    rules.push_back(cfg.rule == RuleFamily::ClenshawCurtis ? UnivariateRule::clenshaw_curtis(d)
                                                           : UnivariateRule::leja(d));
  }
  return rules;
}

Reference compute_reference(const StudyConfig& cfg, const ParametricModel* model, unsigned threads) {
  Reference ref;
  switch (cfg.reference.source) {
    case ReferenceSpec::Source::None:
      break;
    case ReferenceSpec::Source::Values:
      ref.mean = cfg.reference.mean;
      ref.variance = cfg.reference.variance;
      ref.skewness = cfg.reference.skewness;
      break;
    case ReferenceSpec::Source::Gauss: {
      const auto g = detail::gauss_rule(cfg.inputs.at(0), static_cast<std::size_t>(cfg.reference.gauss_points));
      std::vector<double> values(g.nodes.size());
      parallel_for(values.size(), threads, [&](std::size_t i) { values[i] = (*model)(std::vector<double>{g.nodes[i]}); });
      const auto m = moments_from_values(values, g.weights);
      ref = {m.mean, m.variance, m.skewness, values.size()};
      break;
    }
    case ReferenceSpec::Source::Adaptive: {
      AdaptiveConfig ac;
      ac.tolerance = cfg.reference.adaptive_tolerance;
      ac.budget = cfg.reference.adaptive_budget;
      ac.max_level_per_dim = cfg.max_level_per_dim;
      const auto result = adapt(model->evaluator, make_rules(cfg, cfg.inputs), ac, threads);
      const auto m = moments_from_weights(result.surrogate);
      ref = {m.mean, m.variance, m.skewness, result.surrogate.num_points()};
      break;
    }
  }
  return ref;
}

json index_set_json(const MultiIndexSet& set) {
  json arr = json::array();
  for (const auto& index : set) arr.push_back(index.levels());
  return arr;
}

std::vector<double> evaluate_model(const ParametricModel& model, const Sample& ys, unsigned threads) {
  std::vector<double> out(ys.size());
  parallel_for(ys.size(), threads, [&](std::size_t i) { out[i] = model(ys[i]); });
  return out;
}

StudyOutput run_nodes(const StudyConfig& cfg, json& report) {
  const auto& dist = cfg.inputs.at(0);
  const auto rule = cfg.rule == RuleFamily::ClenshawCurtis ? UnivariateRule::clenshaw_curtis(dist, cfg.max_level)
                                                           : UnivariateRule::leja(dist, cfg.max_level);
  Csv csv({"level", "index", "sequence_index", "node", "weight"});
  for (int level = 0; level <= cfg.max_level; ++level) {
    const auto q = rule.quadrature(level);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      csv.row({std::to_string(level), std::to_string(i), std::to_string(q.sequence_index[i]), num(q.nodes[i]),
               num(q.weights[i])});
    }
  }
  report["nodes"] = rule.size();
  return {csv.text(), report, std::nullopt};
}

StudyOutput run_quad_1d(const StudyConfig& cfg, const ParametricModel& model, unsigned threads, json& report) {
  const auto& dist = cfg.inputs.at(0);
  const auto rule = cfg.rule == RuleFamily::ClenshawCurtis ? UnivariateRule::clenshaw_curtis(dist, cfg.max_level)
                                                           : UnivariateRule::leja(dist, cfg.max_level);
  const auto ref = compute_reference(cfg, &model, threads);
  std::vector<double> values(rule.size());
  parallel_for(values.size(), threads, [&](std::size_t i) { values[i] = model(std::vector<double>{rule.node(i)}); });

  Csv csv({"level", "evaluations", "mean", "variance", "skewness", "abs_err_mean", "abs_err_variance",
           "abs_err_skewness"});
  for (int level = 0; level <= cfg.max_level; ++level) {
    const auto q = rule.quadrature(level);
    std::vector<double> v;
    for (auto j : q.sequence_index) v.push_back(values[j]);
    const auto m = moments_from_values(v, q.weights);
    csv.row({std::to_string(level), std::to_string(v.size()), num(m.mean), num(m.variance), num(m.skewness),
             num(abs_err(m.mean, ref.mean)), num(abs_err(m.variance, ref.variance)),
             num(abs_err(m.skewness, ref.skewness))});
  }
  report["reference"] = reference_json(ref);
  report["evaluations"] = values.size();
  return {csv.text(), report, std::nullopt};
}

StudyOutput run_interp_1d(const StudyConfig& cfg, const ParametricModel& model, unsigned threads, json& report) {
  const JointDistribution sampling(cfg.cv_inputs.empty() ? cfg.inputs : cfg.cv_inputs);
  const auto ys = sampling.sample(cfg.cv_samples, cfg.seed);
  const auto truth = evaluate_model(model, ys, threads);

  SparseSurrogate s(make_rules(cfg, cfg.inputs));
  Csv csv({"level", "evaluations", "cv_error"});
  for (int level = 0; level <= cfg.max_level; ++level) {
    const MultiIndex index{level};
    s.prepare(index);
    const auto grid = s.new_points(index);
    const auto values = evaluate_model(model, grid.points, threads);
    s.add_index(index, values, threads);
    const auto approx = s.evaluate_many(ys, threads);
    double worst = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) worst = std::max(worst, std::abs(approx[i] - truth[i]));
    csv.row({std::to_string(level), std::to_string(s.num_points()), num(worst)});
  }
  report["evaluations"] = s.num_points();
  return {csv.text(), report, std::nullopt};
}

struct BuiltSurrogate {
  SparseSurrogate surrogate;
  std::optional<MultiIndexSet> core;
};

BuiltSurrogate load_or_adapt(const StudyConfig& cfg, const ParametricModel* model, unsigned threads, json& report) {
  if (!cfg.surrogate_file.empty()) {
    try {
      auto s = load_surrogate(cfg.surrogate_file);
      if (!cfg.inputs.empty() && s.dim() != cfg.inputs.size()) {
        throw ConfigError(cfg.surrogate_file + ": surrogate has " + std::to_string(s.dim()) + " inputs, config has " +
                          std::to_string(cfg.inputs.size()));
      }
      return {std::move(s), std::nullopt};
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  AdaptiveConfig ac;
  ac.budget = cfg.budget;
  ac.tolerance = cfg.tolerance;
  ac.max_level_per_dim = cfg.max_level_per_dim;
  auto result = adapt(model->evaluator, make_rules(cfg, cfg.inputs), ac, threads);
  report["termination"] = result.termination == Termination::Budget ? "budget" : "tolerance";
  report["steps"] = result.records.size();
  return {std::move(result.surrogate), std::move(result.core)};
}

JointDistribution surrogate_joint(const SparseSurrogate& s) {
  std::vector<BoundedDistribution> d;
  for (const auto& rule : s.rules()) d.push_back(rule.distribution());
  return JointDistribution(d);
}

StudyOutput run_adapt(const StudyConfig& cfg, const ParametricModel& model, unsigned threads, json& report) {
  const auto ref = compute_reference(cfg, &model, threads);

  Sample ys;
  std::vector<double> truth;
  std::vector<double> approx;
  if (cfg.cv_samples > 0) {
    const JointDistribution sampling(cfg.cv_inputs.empty() ? cfg.inputs : cfg.cv_inputs);
    ys = sampling.sample(cfg.cv_samples, cfg.seed);
    truth = evaluate_model(model, ys, threads);
    approx.assign(ys.size(), 0.0);
  }

  Csv csv({"step", "chosen", "indicator", "indicator_sum", "evaluations", "mean", "variance", "cv_error",
           "abs_err_mean", "abs_err_variance"});
  auto observer = [&](const RefinementRecord& rec, const AdaptiveState& state) {
    std::optional<double> cv;
    if (!ys.empty()) {
      // The joined interpolant grows by exactly the added blocks.
      parallel_for(ys.size(), threads, [&](std::size_t i) {
        for (const auto& index : state.added) approx[i] += block_eval(state.core.rules(), state.block(index), ys[i]);
      });
      double worst = 0.0;
      for (std::size_t i = 0; i < ys.size(); ++i) worst = std::max(worst, std::abs(approx[i] - truth[i]));
      cv = worst;
    }
    csv.row({std::to_string(rec.step), rec.chosen.to_string(), num(rec.indicator), num(rec.indicator_sum),
             std::to_string(rec.evaluations), num(rec.mean), num(rec.variance), num(cv),
             num(abs_err(rec.mean, ref.mean)), num(abs_err(rec.variance, ref.variance))});
  };

  AdaptiveConfig ac;
  ac.budget = cfg.budget;
  ac.tolerance = cfg.tolerance;
  ac.max_level_per_dim = cfg.max_level_per_dim;
  auto result = adapt(model.evaluator, make_rules(cfg, cfg.inputs), ac, threads, observer);
  const auto m = moments_from_weights(result.surrogate);

  report["termination"] = result.termination == Termination::Budget ? "budget" : "tolerance";
  report["steps"] = result.records.size();
  report["evaluations"] = result.surrogate.num_points();
  report["core_index_set"] = index_set_json(result.core);
  report["final_index_set"] = index_set_json(result.surrogate.index_set());
  report["moments"] = {{"mean", m.mean}, {"variance", m.variance}, {"skewness", m.skewness}, {"degenerate", m.degenerate}};
  report["reference"] = reference_json(ref);
  StudyOutput out{csv.text(), report, std::nullopt};
  if (cfg.save_surrogate) out.surrogate = surrogate_to_json(result.surrogate);
  return out;
}

StudyOutput run_moments(const StudyConfig& cfg, const ParametricModel* model, unsigned threads, json& report) {
  const auto ref = compute_reference(cfg, model, threads);
  auto built = load_or_adapt(cfg, model, threads, report);
  const auto& s = built.surrogate;
  Csv csv({"method", "evaluations", "mean", "variance", "skewness", "degenerate", "mean_std_error", "abs_err_mean",
           "abs_err_variance", "abs_err_skewness"});
  auto emit = [&](const std::string& method, const MomentReport& m) {
    csv.row({method, std::to_string(m.evaluations_used), num(m.mean), num(m.variance), num(m.skewness),
             m.degenerate ? "1" : "0", num(m.mean_std_error), num(abs_err(m.mean, ref.mean)),
             num(abs_err(m.variance, ref.variance)), num(abs_err(m.skewness, ref.skewness))});
  };
  emit("quadrature", moments_from_weights(s));
  if (cfg.samples > 0) emit("surrogate-mc", surrogate_mc(s, surrogate_joint(s), cfg.samples, cfg.seed, threads));
  report["evaluations"] = s.num_points();
  report["final_index_set"] = index_set_json(s.index_set());
  report["reference"] = reference_json(ref);
  StudyOutput out{csv.text(), report, std::nullopt};
  if (cfg.save_surrogate) out.surrogate = surrogate_to_json(s);
  return out;
}

StudyOutput run_sobol(const StudyConfig& cfg, const ParametricModel* model, unsigned threads, json& report) {
  auto built = load_or_adapt(cfg, model, threads, report);
  const auto& s = built.surrogate;
  const auto rep = sobol_saltelli(s, surrogate_joint(s), cfg.samples, cfg.seed, threads);
  Csv csv({"parameter", "first_order", "total_order", "reported"});
  for (std::size_t n = 0; n < s.dim(); ++n) {
    const std::string name = n < cfg.input_names.size() ? cfg.input_names[n] : "y" + std::to_string(n + 1);
    csv.row({name, num(rep.first_order[n]), num(rep.total_order[n]), rep.first_order[n] >= 0.01 ? "1" : "0"});
  }
  report["evaluations"] = s.num_points();
  report["final_index_set"] = index_set_json(s.index_set());
  report["sobol"] = {{"sample_size", rep.sample_size},
                     {"surrogate_evaluations", rep.evaluations},
                     {"mean", rep.mean},
                     {"variance", rep.variance}};
  StudyOutput out{csv.text(), report, std::nullopt};
  if (cfg.save_surrogate) out.surrogate = surrogate_to_json(s);
  return out;
}

StudyOutput run_cv_error(const StudyConfig& cfg, const ParametricModel& model, unsigned threads, json& report) {
  auto built = load_or_adapt(cfg, &model, threads, report);
  const auto& s = built.surrogate;
  const JointDistribution sampling(!cfg.cv_inputs.empty() ? cfg.cv_inputs
                                   : !cfg.inputs.empty()  ? cfg.inputs
                                                          : surrogate_joint(s).marginals());
  if (sampling.dim() != s.dim()) throw ConfigError("cross-validation inputs do not match the surrogate dimension");
  const auto ys = sampling.sample(cfg.cv_samples, cfg.seed);
  const double cv = cross_validation_error(s, model.evaluator, ys, threads);
  Csv csv({"samples", "evaluations", "cv_error"});
  csv.row({std::to_string(ys.size()), std::to_string(s.num_points()), num(cv)});
  report["evaluations"] = s.num_points();
  report["final_index_set"] = index_set_json(s.index_set());
  StudyOutput out{csv.text(), report, std::nullopt};
  if (cfg.save_surrogate) out.surrogate = surrogate_to_json(s);
  return out;
}

}  // namespace

StudyOutput run_study(const StudyConfig& cfg, unsigned threads) {
  const auto t0 = std::chrono::steady_clock::now();
  if (threads < 1) threads = 1;
  json report{{"study", cfg.study}, {"version", SPARSECOLL_VERSION}, {"seed", cfg.seed}, {"threads", threads},
              {"config", cfg.raw}};
  std::optional<ParametricModel> model;
  if (!cfg.model_name.empty() && !cfg.inputs.empty()) model = make_model(cfg);
  const ParametricModel* mp = model ? &*model : nullptr;

  StudyOutput out;
  if (cfg.study == "nodes") {
    out = run_nodes(cfg, report);
  } else if (cfg.study == "quad-1d") {
    out = run_quad_1d(cfg, *model, threads, report);
  } else if (cfg.study == "interp-1d") {
    out = run_interp_1d(cfg, *model, threads, report);
  } else if (cfg.study == "adapt") {
    out = run_adapt(cfg, *model, threads, report);
  } else if (cfg.study == "moments") {
    out = run_moments(cfg, mp, threads, report);
  } else if (cfg.study == "sobol") {
    out = run_sobol(cfg, mp, threads, report);
  } else if (cfg.study == "cv-error") {
    if (!model) throw ConfigError("'cv-error' needs a model with inputs");
    out = run_cv_error(cfg, *model, threads, report);
  } else {
    throw ConfigError("unknown study '" + cfg.study + "'");
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.report["timings"] = {{"total_seconds", std::chrono::duration<double>(t1 - t0).count()}};
  return out;
}

int run_cli(const CliOptions& options, std::ostream& out, std::ostream& err) {
  StudyConfig cfg;
  try {
    std::ifstream in(options.config_path);
    if (!in) throw ConfigError(options.config_path + ": cannot read configuration file");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto base = fs::path(options.config_path).parent_path();
    cfg = parse_study_config(options.study, buf.str(), options.config_path, base.empty() ? "." : base.string());
    if (options.seed) cfg.seed = *options.seed;
    if (options.threads < 1) throw ConfigError("--threads must be at least 1");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  StudyOutput result;
  try {
    result = run_study(cfg, options.threads);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }

  try {
    if (!options.out_dir) {
      out << result.csv;
      return 0;
    }
    const fs::path dir(*options.out_dir);
    fs::create_directories(dir);
    auto write = [&](const fs::path& p, const std::string& text) {
      std::ofstream f(p, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + p.string());
      f << text;
      if (!f) throw std::runtime_error("failed writing " + p.string());
    };
    write(dir / (options.study + ".csv"), result.csv);
    write(dir / "report.json", result.report.dump(2) + "\n");
    if (result.surrogate) write(dir / "surrogate.json", result.surrogate->dump(1) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace sparsecoll
