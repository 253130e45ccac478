#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsecoll/multiindex.hpp"
#include "sparsecoll/random_inputs.hpp"
#include "sparsecoll/sparse_grid.hpp"
#include "sparsecoll/univariate_rules.hpp"

namespace sparsecoll {

using ModelFn = std::function<double(std::span<const double>)>;

/// A model evaluation threw or returned a non-finite value.
class ModelEvaluationError : public std::runtime_error {
 public:
  ModelEvaluationError(std::vector<double> point, const std::string& reason);
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

/// Refinement went past the per-dimension level cap.
class LevelCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean absolute surplus over the new points of one index.
double error_indicator(std::span<const double> surpluses);

struct AdaptiveConfig {
  /// Maximum number of model evaluations (unique grid points); unset = none.
  std::optional<std::size_t> budget;
  /// Stop once the indicators of the admissible set sum to at most this.
  double tolerance = 0.0;
  int max_level_per_dim = 30;

  void validate() const;
};

struct RefinementRecord {
  int step = 0;
  MultiIndex chosen;
  double indicator = 0.0;
  /// Unique model evaluations so far, admissible margin included.
  std::size_t evaluations = 0;
  /// Moments of the interpolant on the set plus its admissible margin.
  double mean = 0.0;
  double variance = 0.0;
  double indicator_sum = 0.0;
};

enum class Termination { Budget, Tolerance };

struct AdaptiveResult {
  /// Interpolant on the final set joined with its admissible margin.
  SparseSurrogate surrogate;
  /// The greedy set before the margin was joined.
  MultiIndexSet core;
  std::vector<RefinementRecord> records;
  Termination termination = Termination::Budget;
};

/// State visible to a per-step observer.
struct AdaptiveState {
  const SparseSurrogate& core;
  const std::map<MultiIndex, IndexBlock>& margin;
  /// Indices whose blocks joined core + margin in this step. The joined
  /// interpolant changes by exactly these blocks.
  const std::vector<MultiIndex>& added;

  const IndexBlock& block(const MultiIndex& index) const;

  /// Copy of the core surrogate with the margin blocks joined in.
  SparseSurrogate joined() const;
};

using StepObserver = std::function<void(const RefinementRecord&, const AdaptiveState&)>;

/// Greedy dimension-adaptive collocation. Margin evaluations run on up to
/// `threads` threads; results do not depend on the thread count.
AdaptiveResult adapt(const ModelFn& model, const JointDistribution& joint, RuleFamily family,
                     const AdaptiveConfig& config, unsigned threads = 1,
                     const StepObserver& observer = {});

/// Same with explicit univariate rules (one per dimension).
AdaptiveResult adapt(const ModelFn& model, std::vector<UnivariateRule> rules, const AdaptiveConfig& config,
                     unsigned threads = 1, const StepObserver& observer = {});

}  // namespace sparsecoll
