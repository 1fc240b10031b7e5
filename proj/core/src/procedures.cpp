#include "eclosure/procedures.hpp"

#include <algorithm>
#include <stdexcept>

#include "eclosure/calibrators.hpp"
#include "eclosure/shortcuts.hpp"

namespace eclosure {

namespace {

struct MethodName {
  Method method;
  const char* name;
};

constexpr MethodName kNames[] = {
    {Method::ebh, "ebh"},
    {Method::ma_ebh, "ma-ebh"},
    {Method::bh, "bh"},
    {Method::by, "by"},
    {Method::su, "su"},
    {Method::storey_bh, "storey-bh"},
    {Method::knockoff, "knockoff"},
    {Method::closed_ebh, "closed-ebh"},
    {Method::closed_by, "closed-by"},
    {Method::closed_su, "closed-su"},
    {Method::closed_bh, "closed-bh"},
    {Method::closed_adabh, "closed-adabh"},
    {Method::closed_knockoff, "closed-knockoff"},
    {Method::eholm, "eholm"},
};

ProcedureResult result(Method method, Subset rejected, double alpha,
                       std::vector<std::pair<std::string, double>> diagnostics = {}) {
  return ProcedureResult{method, rejected, alpha, std::nullopt, std::move(diagnostics)};
}

// Top r by descending e, ties by smallest index.
Subset top_e(const std::vector<double>& e, int r) {
  return Subset::prefix(order_by_evalue_desc(e), r);
}

double mean_of(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

}  // namespace

std::string to_string(Method method) {
  for (const auto& n : kNames)
    if (n.method == method) return n.name;
  return "unknown";
}

Method parse_method(const std::string& text) {
  std::string key = text;
  std::transform(key.begin(), key.end(), key.begin(), ::tolower);
  std::replace(key.begin(), key.end(), '_', '-');
  if (key == "maebh") key = "ma-ebh";
  if (key == "storeybh" || key == "adabh") key = "storey-bh";
  if (key == "e-holm") key = "eholm";
  for (const auto& n : kNames)
    if (key == n.name) return n.method;
  throw DomainError("unknown method '" + text + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> out;
    for (const auto& n : kNames) out.push_back(n.method);
    return out;
  }();
  return methods;
}

ValueKind input_kind(Method method) {
  switch (method) {
    case Method::ebh:
    case Method::ma_ebh:
    case Method::closed_ebh:
    case Method::eholm:
      return ValueKind::evalue;
    case Method::knockoff:
    case Method::closed_knockoff:
      return ValueKind::knockoff_stat;
    default:
      return ValueKind::pvalue;
  }
}

bool is_closed(Method method) {
  switch (method) {
    case Method::closed_ebh:
    case Method::closed_by:
    case Method::closed_su:
    case Method::closed_bh:
    case Method::closed_adabh:
    case Method::closed_knockoff:
    case Method::eholm:
      return true;
    default:
      return false;
  }
}

double ProcedureResult::diagnostic(const std::string& name) const {
  for (const auto& [n, v] : diagnostics)
    if (n == name) return v;
  throw std::out_of_range("no diagnostic '" + name + "'");
}

ProcedureResult ebh(const ValueVector& e_values, double alpha) {
  e_values.require(ValueKind::evalue, "ebh");
  validate_alpha(alpha);
  const ComparePolicy policy;
  const auto& e = e_values.values();
  const int m = e_values.size();
  std::vector<double> sorted = e;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  int r = 0;
  for (int k = m; k >= 1; --k) {
    if (policy.geq(k * sorted[k - 1], m / alpha)) {
      r = k;
      break;
    }
  }
  return result(Method::ebh, top_e(e, r), alpha, {{"r", double(r)}});
}

ProcedureResult ma_ebh(const ValueVector& e_values, double alpha) {
  e_values.require(ValueKind::evalue, "ma_ebh");
  validate_alpha(alpha);
  const ComparePolicy policy;
  const auto& e = e_values.values();
  const int m = e_values.size();
  std::vector<double> sorted = e;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  int r = 0;
  for (int k = m; k >= 1; --k) {
    if (policy.geq(sorted[k - 1], (m - 1.0) / (alpha * k))) {
      r = k;
      break;
    }
  }
  const double mean = mean_of(e);
  // Strict gate: a mean equal to 1/alpha (within tolerance) rejects nothing.
  const bool gate = !policy.geq(1.0 / alpha, mean);
  const int rejected = gate ? r : 0;
  return result(Method::ma_ebh, top_e(e, rejected), alpha,
                {{"r", double(r)}, {"mean", mean}, {"gate", gate ? 1.0 : 0.0}});
}

ProcedureResult bh(const ValueVector& p_values, double alpha) {
  p_values.require(ValueKind::pvalue, "bh");
  validate_alpha(alpha);
  const int m = p_values.size();
  const int r = step_up_count(p_values.values(), alpha / m);
  return result(Method::bh, smallest_p(p_values.values(), r), alpha, {{"r", double(r)}});
}

ProcedureResult by(const ValueVector& p_values, double alpha) {
  p_values.require(ValueKind::pvalue, "by");
  validate_alpha(alpha);
  const int m = p_values.size();
  const double hm = harmonic(m);
  const int r = step_up_count(p_values.values(), alpha / (m * hm));
  return result(Method::by, smallest_p(p_values.values(), r), alpha,
                {{"r", double(r)}, {"h_m", hm}});
}

ProcedureResult su(const ValueVector& p_values, double alpha) {
  p_values.require(ValueKind::pvalue, "su");
  const SuConstants constants(alpha);
  const int m = p_values.size();
  const int r = step_up_count(p_values.values(), alpha / (constants.ell * m));
  return result(Method::su, smallest_p(p_values.values(), r), alpha,
                {{"r", double(r)}, {"ell", constants.ell}});
}

ProcedureResult storey_bh(const ValueVector& p_values, double alpha, double lambda) {
  p_values.require(ValueKind::pvalue, "storey_bh");
  validate_alpha(alpha);
  const int m = p_values.size();
  const double pi0 = storey_pi0(p_values.values(), lambda);
  const int r = step_up_count(p_values.values(), alpha / (pi0 * m));
  return result(Method::storey_bh, smallest_p(p_values.values(), r), alpha,
                {{"r", double(r)}, {"pi0", pi0}, {"lambda", lambda}});
}

ProcedureResult knockoff_filter(const ValueVector& w, double alpha) {
  w.require(ValueKind::knockoff_stat, "knockoff_filter");
  const auto stats = knockoff_threshold(w.values(), alpha);
  return result(Method::knockoff, stats.rejected, alpha,
                {{"r", double(stats.rejected.size())},
                 {"c_alpha", stats.c_alpha},
                 {"f_neg", double(stats.f_neg)}});
}

ECollection closed_collection(Method method, const ValueVector& values, double alpha,
                              double lambda) {
  switch (method) {
    case Method::closed_ebh:
    case Method::eholm:
      return mean_collection(values);
    case Method::closed_by:
      return by_collection(values, alpha);
    case Method::closed_su:
      return su_collection(values, alpha);
    case Method::closed_bh:
      return bh_collection(values, alpha);
    case Method::closed_adabh:
      return storey_adabh_collection(values, alpha, lambda);
    case Method::closed_knockoff:
      return knockoff_collection(values, alpha);
    default:
      throw DomainError(to_string(method) + " is not a closed method");
  }
}

MembershipCertificate closed_member(Method method, const ECollection& collection, double alpha,
                                    Subset r, const ComparePolicy& policy) {
  const auto& src = collection.source();
  if (!collection.restricted()) {
    switch (method) {
      case Method::closed_ebh:
      case Method::eholm:
      case Method::closed_adabh:
        return ebhbar_member_fast(collection.base(), alpha, r, policy);
      case Method::closed_bh:
        return closedbh_member_rule(src.values, src.param("alpha"), r, policy);
      case Method::closed_by:
      case Method::closed_su:
        return monotone_member_fast(collection, src.values, alpha, r, policy);
      case Method::closed_knockoff:
        return closedknockoff_member_rule(src.values, src.param("alpha"), r, policy);
      default:
        break;
    }
  }
  return member(collection, Loss::fdp(), alpha, r, policy);
}

ProcedureResult closed_variant(Method method, const ValueVector& values, double alpha,
                               const ClosedOptions& options) {
  validate_alpha(alpha);
  values.require(input_kind(method), to_string(method).c_str());
  ECollection collection = closed_collection(method, values, alpha, options.lambda);
  const auto& v = values.values();
  const int m = values.size();
  std::vector<std::pair<std::string, double>> diag;
  Subset rejected;

  if (options.exhaustive && method != Method::eholm) {
    rejected = largest_member(collection, Loss::fdp(), alpha, natural_order(collection), true,
                              options.policy);
  } else {
    switch (method) {
      case Method::closed_ebh:
        rejected = ebhbar_largest_fast(v, alpha, options.policy);
        break;
      case Method::eholm:
        rejected = eholm_fast(v, alpha, options.policy);
        break;
      case Method::closed_by:
      case Method::closed_su:
        rejected = monotone_largest(collection, v, alpha, options.policy);
        break;
      case Method::closed_adabh:
        rejected = ebhbar_largest_fast(collection.base(), alpha, order_by_pvalue_asc(v),
                                       options.policy);
        break;
      case Method::closed_bh: {
        const auto order = order_by_pvalue_asc(v);
        for (int r = m; r > 0; --r) {
          Subset cand = Subset::prefix(order, r);
          if (closedbh_member_rule(v, alpha, cand, options.policy).member) {
            rejected = cand;
            break;
          }
        }
        break;
      }
      case Method::closed_knockoff: {
        const auto order = order_by_w_desc(v);
        for (int r = m; r > 0; --r) {
          Subset cand = Subset::prefix(order, r);
          if (closedknockoff_member_rule(v, alpha, cand, options.policy).member) {
            rejected = cand;
            break;
          }
        }
        break;
      }
      default:
        throw DomainError(to_string(method) + " is not a closed method");
    }
  }

  diag.push_back({"r", double(rejected.size())});
  for (const char* key : {"ell", "pi0", "c_alpha", "f_neg"})
    if (collection.source().has_param(key)) diag.push_back({key, collection.source().param(key)});
  return ProcedureResult{method, rejected, alpha, collection, std::move(diag)};
}

ProcedureResult run_method(Method method, const ValueVector& values, double alpha,
                           const ClosedOptions& options) {
  switch (method) {
    case Method::ebh: return ebh(values, alpha);
    case Method::ma_ebh: return ma_ebh(values, alpha);
    case Method::bh: return bh(values, alpha);
    case Method::by: return by(values, alpha);
    case Method::su: return su(values, alpha);
    case Method::storey_bh: return storey_bh(values, alpha, options.lambda);
    case Method::knockoff: return knockoff_filter(values, alpha);
    default: return closed_variant(method, values, alpha, options);
  }
}

}  // namespace eclosure
