#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eclosure/collections.hpp"
#include "eclosure/engine.hpp"

namespace eclosure {

enum class Method {
  ebh,
  ma_ebh,
  bh,
  by,
  su,
  storey_bh,
  knockoff,
  closed_ebh,
  closed_by,
  closed_su,
  closed_bh,
  closed_adabh,
  closed_knockoff,
  eholm
};

std::string to_string(Method method);
Method parse_method(const std::string& text);
const std::vector<Method>& all_methods();
ValueKind input_kind(Method method);
bool is_closed(Method method);

struct ProcedureResult {
  Method method;
  Subset rejected;
  double alpha;
  std::optional<ECollection> collection;  // closed methods only
  std::vector<std::pair<std::string, double>> diagnostics;

  double diagnostic(const std::string& name) const;
};

ProcedureResult ebh(const ValueVector& e_values, double alpha);
ProcedureResult ma_ebh(const ValueVector& e_values, double alpha);
ProcedureResult bh(const ValueVector& p_values, double alpha);
ProcedureResult by(const ValueVector& p_values, double alpha);
ProcedureResult su(const ValueVector& p_values, double alpha);
ProcedureResult storey_bh(const ValueVector& p_values, double alpha, double lambda);
ProcedureResult knockoff_filter(const ValueVector& w, double alpha);

struct ClosedOptions {
  double lambda = 0.5;     // Storey tuning parameter for closed-adaBH
  bool exhaustive = false;  // global argmax-cardinality member instead of longest prefix
  ComparePolicy policy{};
};

// The e-collection behind a closed method.
ECollection closed_collection(Method method, const ValueVector& values, double alpha,
                              double lambda = 0.5);

// FDR membership in a closed method's collection, through the method's
// polynomial shortcut.
MembershipCertificate closed_member(Method method, const ECollection& collection, double alpha,
                                    Subset r, const ComparePolicy& policy = {});

ProcedureResult closed_variant(Method method, const ValueVector& values, double alpha,
                               const ClosedOptions& options = {});

// Any method by name; closed methods go through closed_variant.
ProcedureResult run_method(Method method, const ValueVector& values, double alpha,
                           const ClosedOptions& options = {});

}  // namespace eclosure
