#include "sparsecoll/adaptive.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <set>
#include <unordered_set>

#include "sparsecoll/parallel.hpp"

namespace sparsecoll {

namespace {

std::string format_point(const std::vector<double>& y) {
  std::string s = "(";
  for (std::size_t n = 0; n < y.size(); ++n) {
    if (n) s += ", ";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", y[n]);
    s += buf;
  }
  return s + ")";
}

double evaluate_checked(const ModelFn& model, const std::vector<double>& y) {
  double v = 0.0;
  try {
    v = model(y);
  } catch (const std::exception& e) {
    throw ModelEvaluationError(y, e.what());
  }
  if (!std::isfinite(v)) throw ModelEvaluationError(y, "non-finite value");
  return v;
}

class Driver {
 public:
  Driver(const ModelFn& model, std::vector<UnivariateRule> rules, const AdaptiveConfig& config, unsigned threads)
      : model_(model), config_(config), threads_(threads), core_(std::move(rules)) {}

  AdaptiveResult run(const StepObserver& observer) {
    const MultiIndex root(core_.dim());
    evaluate_margin({root});
    // The root is always taken; its block was computed against the empty set.
    IndexBlock root_block = std::move(margin_.at(root));
    margin_.erase(root);
    const double root_eta = eta_.at(root);
    eta_.erase(root);
    core_.insert_block(std::move(root_block));
    grow_margin(root);
    added_.insert(added_.begin(), root);

    int step = 0;
    report(step, root, root_eta, observer);
    Termination why;
    while (true) {
      if (config_.budget && evaluations() >= *config_.budget) {
        why = Termination::Budget;
        break;
      }
      if (indicator_sum() <= config_.tolerance) {
        why = Termination::Tolerance;
        break;
      }
      // Lexicographic scan; only a strictly larger indicator replaces the best.
      auto best = eta_.begin();
      for (auto it = eta_.begin(); it != eta_.end(); ++it) {
        if (it->second > best->second) best = it;
      }
      const MultiIndex chosen = best->first;
      const double eta = best->second;
      core_.insert_block(std::move(margin_.at(chosen)));
      margin_.erase(chosen);
      eta_.erase(chosen);
      grow_margin(chosen);
      report(++step, chosen, eta, observer);
    }

    AdaptiveResult result{core_, core_.index_set(), std::move(records_), why};
    for (auto& [index, block] : margin_) result.surrogate.insert_block(std::move(block));
    return result;
  }

 private:
  std::size_t evaluations() const {
    std::size_t n = core_.num_points();
    for (const auto& entry : margin_) n += entry.second.values.size();
    return n;
  }

  double indicator_sum() const {
    double s = 0.0;
    for (const auto& entry : eta_) s += entry.second;
    return s;
  }

  // Evaluates the indices that became admissible when `added` joined the core.
  // Only forward neighbours of `added` can be new.
  void grow_margin(const MultiIndex& added) {
    std::vector<MultiIndex> fresh;
    for (std::size_t n = 0; n < core_.dim(); ++n) {
      MultiIndex next = added.shifted(n, +1);
      if (!core_.index_set().contains(next) && !margin_.count(next) && core_.index_set().is_admissible(next)) {
        fresh.push_back(std::move(next));
      }
    }
    std::sort(fresh.begin(), fresh.end());
    evaluate_margin(fresh);
    added_ = std::move(fresh);
  }

  void evaluate_margin(const std::vector<MultiIndex>& indices) {
    for (const auto& index : indices) {
      if (index.max_level() > config_.max_level_per_dim) {
        throw LevelCapExceeded("refinement requires " + index.to_string() + ", above max_level_per_dim = " +
                               std::to_string(config_.max_level_per_dim));
      }
      core_.prepare(index);
    }
    std::vector<TensorGrid> grids;
    std::vector<std::size_t> offsets;
    std::vector<std::vector<double>> points;
    for (const auto& index : indices) {
      grids.push_back(core_.new_points(index));
      offsets.push_back(points.size());
      for (std::size_t p = 0; p < grids.back().points.size(); ++p) {
        PointKey key(grids.back().node_indices[p]);
        if (core_.contains_point(key) || !pending_.insert(key.bytes()).second) {
          throw std::logic_error("admissible indices share a grid point");
        }
        points.push_back(grids.back().points[p]);
      }
    }
    std::vector<double> values(points.size());
    parallel_for(points.size(), threads_, [&](std::size_t i) { values[i] = evaluate_checked(model_, points[i]); });
    for (std::size_t k = 0; k < indices.size(); ++k) {
      std::span<const double> block_values(values.data() + offsets[k], grids[k].points.size());
      IndexBlock block = core_.compute_block(indices[k], block_values, threads_);
      eta_[indices[k]] = error_indicator(block.surpluses);
      margin_.emplace(indices[k], std::move(block));
    }
  }

  void report(int step, const MultiIndex& chosen, double eta, const StepObserver& observer) {
    double mean = core_.mean_by_surpluses();
    double second = core_.second_moment_by_surpluses();
    for (const auto& entry : margin_) {
      const auto [m1, m2] = block_expectations(core_.rules(), entry.second);
      mean += m1;
      second += m2;
    }
    RefinementRecord record{step, chosen, eta, evaluations(), mean, second - mean * mean, indicator_sum()};
    records_.push_back(record);
    if (observer) observer(record, AdaptiveState{core_, margin_, added_});
  }

  const ModelFn& model_;
  AdaptiveConfig config_;
  unsigned threads_;
  SparseSurrogate core_;
  std::map<MultiIndex, IndexBlock> margin_;
  std::map<MultiIndex, double> eta_;
  std::unordered_set<std::string> pending_;
  std::vector<RefinementRecord> records_;
  std::vector<MultiIndex> added_;
};

}  // namespace

ModelEvaluationError::ModelEvaluationError(std::vector<double> point, const std::string& reason)
    : std::runtime_error("model evaluation failed at " + format_point(point) + ": " + reason),
      point_(std::move(point)) {}

double error_indicator(std::span<const double> surpluses) {
  if (surpluses.empty()) throw InvalidArgument("error indicator of an empty surplus set");
  double sum = 0.0;
  for (double s : surpluses) sum += std::abs(s);
  return sum / static_cast<double>(surpluses.size());
}

void AdaptiveConfig::validate() const {
  if (budget && *budget < 1) throw InvalidArgument("budget must be at least 1");
  if (!(tolerance >= 0.0)) throw InvalidArgument("tolerance must be non-negative");
  if (!budget && tolerance <= 0.0) throw InvalidArgument("need a budget or a positive tolerance");
  if (max_level_per_dim < 1) throw InvalidArgument("max_level_per_dim must be at least 1");
}

const IndexBlock& AdaptiveState::block(const MultiIndex& index) const {
  const auto it = margin.find(index);
  return it != margin.end() ? it->second : core.blocks().at(index);
}

SparseSurrogate AdaptiveState::joined() const {
  SparseSurrogate s = core;
  for (const auto& entry : margin) s.insert_block(entry.second);
  return s;
}

AdaptiveResult adapt(const ModelFn& model, std::vector<UnivariateRule> rules, const AdaptiveConfig& config,
                     unsigned threads, const StepObserver& observer) {
  config.validate();
  if (rules.empty()) throw InvalidArgument("adapt needs at least one input dimension");
  Driver driver(model, std::move(rules), config, threads);
  return driver.run(observer);
}

AdaptiveResult adapt(const ModelFn& model, const JointDistribution& joint, RuleFamily family,
                     const AdaptiveConfig& config, unsigned threads, const StepObserver& observer) {
  config.validate();
  std::vector<UnivariateRule> rules;
  for (const auto& marginal : joint.marginals()) {
    rules.push_back(family == RuleFamily::ClenshawCurtis ? UnivariateRule::clenshaw_curtis(marginal)
                                                         : UnivariateRule::leja(marginal));
  }
  return adapt(model, std::move(rules), config, threads, observer);
}

}  // namespace sparsecoll
