#include "sparsecoll/surrogate_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace sparsecoll {

using nlohmann::json;

json distribution_to_json(const BoundedDistribution& dist) {
  json j{{"kind", to_string(dist.kind())}, {"a", dist.lower()}, {"b", dist.upper()}};
  if (dist.kind() == DistributionKind::Beta) {
    j["alpha"] = dist.alpha();
    j["beta"] = dist.beta_shape();
  }
  return j;
}

BoundedDistribution distribution_from_json(const json& j) {
  const auto kind = distribution_kind_from_string(j.at("kind").get<std::string>());
  const double a = j.at("a").get<double>();
  const double b = j.at("b").get<double>();
  if (kind == DistributionKind::Uniform) return BoundedDistribution::uniform(a, b);
  return BoundedDistribution::beta(j.at("alpha").get<double>(), j.at("beta").get<double>(), a, b);
}

json surrogate_to_json(const SparseSurrogate& surrogate) {
  json dims = json::array();
  for (const auto& rule : surrogate.rules()) {
    dims.push_back({{"family", to_string(rule.family())}, {"distribution", distribution_to_json(rule.distribution())}});
  }
  json blocks = json::array();
  for (const auto& [index, block] : surrogate.blocks()) {
    blocks.push_back({{"index", index.levels()},
                      {"node_indices", block.node_indices},
                      {"values", block.values},
                      {"surpluses", block.surpluses},
                      {"square_surpluses", block.square_surpluses}});
  }
  return {{"format", "sparsecoll-surrogate"},
          {"version", 1},
          {"dim", surrogate.dim()},
          {"dimensions", dims},
          {"blocks", blocks}};
}

SparseSurrogate surrogate_from_json(const json& doc) {
  try {
    if (doc.at("format") != "sparsecoll-surrogate") throw InvalidArgument("not a surrogate document");
    if (doc.at("version").get<int>() != 1) throw InvalidArgument("unsupported surrogate version");
    const auto dim = doc.at("dim").get<std::size_t>();
    const auto& dims = doc.at("dimensions");
    if (dims.size() != dim) throw InvalidArgument("surrogate dimension list has the wrong length");

    std::vector<IndexBlock> blocks;
    for (const auto& jb : doc.at("blocks")) {
      IndexBlock b;
      b.index = MultiIndex(jb.at("index").get<std::vector<int>>());
      b.node_indices = jb.at("node_indices").get<std::vector<NodeTuple>>();
      b.values = jb.at("values").get<std::vector<double>>();
      b.surpluses = jb.at("surpluses").get<std::vector<double>>();
      b.square_surpluses = jb.at("square_surpluses").get<std::vector<double>>();
      if (b.index.dim() != dim) throw InvalidArgument("block index has the wrong dimension");
      const auto n = b.node_indices.size();
      if (b.values.size() != n || b.surpluses.size() != n || b.square_surpluses.size() != n) {
        throw InvalidArgument("block " + b.index.to_string() + " has inconsistent lengths");
      }
      blocks.push_back(std::move(b));
    }
    // Insert in order of total level so every index is admissible when added.
    std::stable_sort(blocks.begin(), blocks.end(), [](const IndexBlock& x, const IndexBlock& y) {
      return x.index.total() != y.index.total() ? x.index.total() < y.index.total() : x.index < y.index;
    });

    std::vector<UnivariateRule> rules;
    for (std::size_t n = 0; n < dim; ++n) {
      const auto family = rule_family_from_string(dims[n].at("family").get<std::string>());
      const auto dist = distribution_from_json(dims[n].at("distribution"));
      int top = 0;
      for (const auto& b : blocks) top = std::max(top, b.index[n]);
      rules.push_back(family == RuleFamily::ClenshawCurtis ? UnivariateRule::clenshaw_curtis(dist, top)
                                                           : UnivariateRule::leja(dist, top));
    }

    SparseSurrogate s(std::move(rules));
    for (auto& b : blocks) {
      if (!(s.index_set().empty() ? b.index == MultiIndex(dim) : s.index_set().is_admissible(b.index)) ||
          s.index_set().contains(b.index)) {
        throw InvalidArgument("stored index set is not downward closed at " + b.index.to_string());
      }
      auto grid = s.new_points(b.index);
      if (grid.node_indices != b.node_indices) {
        throw InvalidArgument("stored node indices of " + b.index.to_string() + " do not match the rules");
      }
      b.points = std::move(grid.points);
      s.insert_block(std::move(b));
    }
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed surrogate document: ") + e.what());
  }
}

void save_surrogate(const SparseSurrogate& surrogate, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << surrogate_to_json(surrogate).dump(1) << '\n';
}

SparseSurrogate load_surrogate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read surrogate file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("surrogate file " + path + ": " + e.what());
  }
  return surrogate_from_json(doc);
}

}  // namespace sparsecoll
