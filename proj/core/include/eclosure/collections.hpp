#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "eclosure/core.hpp"

namespace eclosure {

struct CollectionFlags {
  bool alpha_independent = false;
  bool monotone_in_p = false;
  bool mean_type = false;
};

// What built a collection. Hashing this gives the fingerprint that audits use
// to show that every post hoc step used the same collection.
struct CollectionSource {
  std::string builder;
  ValueKind kind = ValueKind::evalue;
  std::vector<double> values;
  std::vector<std::pair<std::string, double>> params;
  std::string note;

  double param(const std::string& name) const;
  bool has_param(const std::string& name) const;
};

using SetCollection = std::vector<Subset>;

class ECollection {
 public:
  using Evaluator = std::function<double(Subset)>;
  using Feasibility = std::function<bool(Subset)>;

  // `base` holds the per-hypothesis e-values of a mean-type collection.
  ECollection(int m, Evaluator evaluate, CollectionFlags flags, CollectionSource source,
              std::vector<double> base = {}, Feasibility feasible = {});

  int m() const { return impl_->m; }
  // e_S for nonempty S; +inf when S is infeasible.
  double evaluate(Subset s) const;
  double operator()(Subset s) const { return evaluate(s); }
  bool feasible(Subset s) const { return !impl_->feasible || impl_->feasible(s); }
  bool restricted() const { return static_cast<bool>(impl_->feasible); }

  const CollectionFlags& flags() const { return impl_->flags; }
  const CollectionSource& source() const { return impl_->source; }
  const std::vector<double>& base() const { return impl_->base; }
  std::uint64_t fingerprint() const { return impl_->fingerprint; }
  std::string fingerprint_hex() const;

 private:
  struct Impl {
    int m;
    Evaluator evaluate;
    CollectionFlags flags;
    CollectionSource source;
    std::vector<double> base;
    Feasibility feasible;
    std::uint64_t fingerprint;
  };
  std::shared_ptr<const Impl> impl_;
};

struct KnockoffStats {
  std::vector<double> w;
  double c_alpha;
  int f_neg;
  Subset rejected;
};

KnockoffStats knockoff_threshold(const std::vector<double>& w, double alpha);

// max{i : p_(i) <= i * level} under the default comparison policy, 0 if none.
int step_up_count(const std::vector<double>& p, double level);
// Indices of the `count` smallest p-values, ties by smallest index.
Subset smallest_p(const std::vector<double>& p, int count);

// Storey-type estimate max_i pihat(p with p_i set to 0).
double storey_pi0(const std::vector<double>& p, double lambda);

ECollection mean_collection(const ValueVector& e_values);
ECollection product_collection(const ValueVector& e_values);
ECollection by_collection(const ValueVector& p_values, double alpha);
ECollection su_collection(const ValueVector& p_values, double alpha);
ECollection bh_collection(const ValueVector& p_values, double alpha);
ECollection storey_adabh_collection(const ValueVector& p_values, double alpha, double lambda);
ECollection knockoff_collection(const ValueVector& w, double alpha);
ECollection compound_to_collection(const ValueVector& compound_e);
ECollection from_procedure_collection(const SetCollection& family, const Loss& loss, double alpha,
                                      int m);
// `label` names the predicate in the fingerprint.
ECollection restrict_feasible(const ECollection& base, ECollection::Feasibility feasible,
                              const std::string& label = "custom");

// Arbitrary evaluator, used for local test families and experiments.
ECollection custom_collection(int m, ECollection::Evaluator evaluate, CollectionFlags flags,
                              const std::string& label);

// Null sets of the pairwise hypotheses theta_a = theta_b (a < b, lexicographic
// order) that some partition of the parameters makes simultaneously true.
ECollection::Feasibility pairwise_equality_feasibility(int parameters);

}  // namespace eclosure
