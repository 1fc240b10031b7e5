#include "eclosure_tools/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>

#include "eclosure/shortcuts.hpp"
#include "json.hpp"

namespace eclosure::tools {

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt_short(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string join(const std::vector<int>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

Format parse_format(const std::string& text) {
  if (text == "json") return Format::json;
  if (text == "csv") return Format::csv;
  if (text == "text") return Format::text;
  throw DomainError("unknown format '" + text + "' (expected json, csv or text)");
}

ResultRecord cmd_run(Method method, const ValueVector& values, double alpha,
                     const ClosedOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  ProcedureResult res = run_method(method, values, alpha, options);
  const auto stop = std::chrono::steady_clock::now();
  ResultRecord rec;
  rec.method = to_string(method);
  rec.alpha = alpha;
  rec.m = values.size();
  rec.rejected = res.rejected.one_based();
  rec.diagnostics = res.diagnostics;
  rec.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return rec;
}

std::string render(const ResultRecord& r, Format format) {
  std::ostringstream os;
  switch (format) {
    case Format::json:
      os << to_json_line(r) << "\n";
      break;
    case Format::csv:
      os << "method,alpha,m,count,rejected\n"
         << r.method << "," << fmt_double(r.alpha) << "," << r.m << "," << r.rejected.size()
         << ",\"" << join(r.rejected, " ") << "\"\n";
      break;
    case Format::text:
      os << r.method << " at alpha=" << fmt_short(r.alpha) << ": " << r.rejected.size() << " of "
         << r.m << " rejected {" << join(r.rejected, ",") << "}\n";
      for (const auto& [name, value] : r.diagnostics) os << "  " << name << " = " << fmt_short(value) << "\n";
      break;
  }
  return os.str();
}

std::vector<std::pair<Method, Method>> default_pairs(ValueKind kind) {
  switch (kind) {
    case ValueKind::evalue:
      return {{Method::ebh, Method::closed_ebh}, {Method::ma_ebh, Method::closed_ebh}};
    case ValueKind::pvalue:
      return {{Method::bh, Method::closed_bh},
              {Method::by, Method::closed_by},
              {Method::su, Method::closed_su},
              {Method::storey_bh, Method::closed_adabh}};
    case ValueKind::knockoff_stat:
      return {{Method::knockoff, Method::closed_knockoff}};
  }
  return {};
}

std::vector<CompareRow> cmd_compare(const ValueVector& values, const std::vector<double>& alphas,
                                    const std::vector<std::pair<Method, Method>>& pairs,
                                    double lambda) {
  if (alphas.empty()) throw DomainError("compare needs at least one alpha");
  if (pairs.empty()) throw DomainError("compare needs at least one method pair");
  ClosedOptions options;
  options.lambda = lambda;
  std::vector<CompareRow> rows;
  for (double alpha : alphas) {
    for (const auto& [classical, closed] : pairs) {
      if (!is_closed(closed) || is_closed(classical))
        throw DomainError("pairs must be (classical, closed)");
      const int a = run_method(classical, values, alpha, options).rejected.size();
      const int b = run_method(closed, values, alpha, options).rejected.size();
      rows.push_back({alpha, classical, closed, a, b});
    }
  }
  return rows;
}

std::string render(const std::vector<CompareRow>& rows, Format format) {
  std::ostringstream os;
  if (format == Format::json) {
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["alpha"] = r.alpha;
      j["classical"] = to_string(r.classical);
      j["closed"] = to_string(r.closed);
      j["classical_count"] = r.classical_count;
      j["closed_count"] = r.closed_count;
      os << j.dump() << "\n";
    }
  } else if (format == Format::csv) {
    os << "alpha,classical,closed,classical_count,closed_count\n";
    for (const auto& r : rows) {
      os << fmt_double(r.alpha) << "," << to_string(r.classical) << "," << to_string(r.closed)
         << "," << r.classical_count << "," << r.closed_count << "\n";
    }
  } else {
    os << std::left << std::setw(8) << "alpha" << std::setw(12) << "classical" << std::setw(17)
       << "closed" << std::right << std::setw(6) << "count" << std::setw(8) << "closed" << "\n";
    for (const auto& r : rows) {
      os << std::left << std::setw(8) << fmt_short(r.alpha) << std::setw(12)
         << to_string(r.classical) << std::setw(17) << to_string(r.closed) << std::right
         << std::setw(6) << r.classical_count << std::setw(8) << r.closed_count << "\n";
    }
  }
  return os.str();
}

MembershipCertificate certify_fdr(Method method, const ECollection& collection, double alpha,
                                  Subset r) {
  if (collection.m() <= kCanonicalWitnessMaxM) return member(collection, Loss::fdp(), alpha, r);
  return closed_member(method, collection, alpha, r);
}

Subset parse_set(const std::string& text, int m) {
  std::vector<int> idx;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t{}");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t{}");
    const std::string tok = item.substr(first, last - first + 1);
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw DomainError("bad index '" + tok + "' in set");
    if (v < 1 || v > m)
      throw DomainError("set index " + std::to_string(v) + " outside 1.." + std::to_string(m));
    idx.push_back(v);
  }
  return Subset::from_one_based(idx);
}

QueryResult cmd_query(Method method, const ValueVector& values, double alpha, Subset set,
                      double lambda) {
  if (!is_closed(method)) throw DomainError("query needs a closed method");
  values.require(input_kind(method), "query");
  if (!set.subset_of(Subset::full(values.size()))) throw DomainError("set exceeds [m]");
  ECollection e = closed_collection(method, values, alpha, lambda);
  QueryResult out{method, alpha, set, certify_fdr(method, e, alpha, set), std::nullopt,
                  std::nullopt, ""};
  if (e.m() <= member_cap()) {
    out.true_discovery_bound = true_discovery_bound(e, alpha, set);
    if (e.flags().alpha_independent) {
      out.critical_alpha = critical_alpha(e, Loss::fdp(), set);
    } else {
      out.note = "critical alpha is not available: the " + to_string(method) +
                 " collection is built at a fixed alpha, so its e-values are not valid at other "
                 "levels";
    }
  } else {
    out.note = "m exceeds the enumeration cap; bound and critical alpha skipped";
  }
  return out;
}

std::string render(const QueryResult& q, Format format) {
  std::ostringstream os;
  const auto& c = q.certificate;
  if (format == Format::json) {
    nlohmann::ordered_json j;
    j["method"] = to_string(q.method);
    j["alpha"] = q.alpha;
    j["set"] = q.set.one_based();
    j["member"] = c.member;
    j["witness"] = c.witness ? nlohmann::ordered_json(c.witness->one_based()) : nullptr;
    j["margin"] = std::isfinite(c.margin) ? nlohmann::ordered_json(c.margin)
                                          : nlohmann::ordered_json(fmt_double(c.margin));
    if (q.true_discovery_bound) j["true_discovery_bound"] = *q.true_discovery_bound;
    if (q.critical_alpha) {
      j["critical_alpha"] = std::isfinite(*q.critical_alpha)
                                ? nlohmann::ordered_json(*q.critical_alpha)
                                : nlohmann::ordered_json(fmt_double(*q.critical_alpha));
    }
    if (!q.note.empty()) j["note"] = q.note;
    os << j.dump() << "\n";
  } else if (format == Format::csv) {
    os << "method,alpha,set,member,witness,true_discovery_bound,critical_alpha\n"
       << to_string(q.method) << "," << fmt_double(q.alpha) << ",\"" << join(q.set.one_based(), " ")
       << "\"," << (c.member ? "true" : "false") << ",\""
       << (c.witness ? join(c.witness->one_based(), " ") : "") << "\","
       << (q.true_discovery_bound ? std::to_string(*q.true_discovery_bound) : "") << ","
       << (q.critical_alpha ? fmt_double(*q.critical_alpha) : "") << "\n";
  } else {
    os << q.set.to_string() << " is " << (c.member ? "" : "not ") << "a member of the "
       << to_string(q.method) << " collection at alpha=" << fmt_short(q.alpha) << "\n";
    if (c.witness) {
      os << "  witness S=" << c.witness->to_string() << ": e_S=" << fmt_short(c.witness_e)
         << " < " << fmt_short(c.witness_bound) << "\n";
    }
    if (q.true_discovery_bound) os << "  true discoveries >= " << *q.true_discovery_bound << "\n";
    if (q.critical_alpha) os << "  critical alpha = " << fmt_short(*q.critical_alpha) << "\n";
    if (!q.note.empty()) os << "  " << q.note << "\n";
  }
  return os.str();
}

std::string cmd_figure(const std::string& kind, int k, int m, double alpha) {
  if (kind != "fig1") throw DomainError("unsupported figure '" + kind + "' (only fig1)");
  const ValueVector profile = greedy_boundary_ebh(k, m, alpha);
  std::ostringstream os;
  os << "rank,e\n";
  for (int i = 0; i < m; ++i) os << i + 1 << "," << fmt_double(profile[i]) << "\n";
  return os.str();
}

namespace {

// Instances mix zeros, ties and values straddling the 1/alpha boundary, where
// shortcut bugs tend to show.
std::vector<double> gen_evalues(std::mt19937_64& rng, int m, double alpha) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> e(m);
  for (int i = 0; i < m; ++i) {
    const double x = u(rng);
    if (x < 0.15) {
      e[i] = 0.0;
    } else if (x < 0.55) {
      e[i] = std::floor(u(rng) * 6) / (2 * alpha);
    } else if (x < 0.65 && i > 0) {
      e[i] = e[i - 1];
    } else {
      e[i] = -std::log(1.0 - u(rng)) * (u(rng) < 0.5 ? 1.0 : 3.0) / alpha;
    }
  }
  return e;
}

std::vector<double> gen_pvalues(std::mt19937_64& rng, int m, double alpha) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(m);
  for (int i = 0; i < m; ++i) {
    const double x = u(rng);
    if (x < 0.5) {
      p[i] = u(rng) * alpha * 0.5;
    } else if (x < 0.6 && i > 0) {
      p[i] = p[i - 1];
    } else {
      p[i] = u(rng);
    }
  }
  return p;
}

std::vector<double> gen_knockoff(std::mt19937_64& rng, int m) {
  std::uniform_int_distribution<int> mag(1, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(m);
  for (int i = 0; i < m; ++i) w[i] = (u(rng) < 0.75 ? 1.0 : -1.0) * mag(rng);
  return w;
}

struct Check {
  std::string name;
  int agree = 0;
  int mismatch = 0;
  std::string replay;
};

std::string replay_json(const std::string& check, const char* kind, const std::vector<double>& v,
                        double alpha, std::optional<Subset> set) {
  std::ostringstream os;
  os << "{\"check\":\"" << check << "\",\"kind\":\"" << kind << "\",\"alpha\":"
     << fmt_double(alpha) << ",\"values\":[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << fmt_double(v[i]);
  os << "]";
  if (set) os << ",\"set\":[" << join(set->one_based(), ",") << "]";
  os << "}";
  return os.str();
}

}  // namespace

SelfcheckReport cmd_selfcheck(const SelfcheckOptions& o) {
  if (o.m < 1 || o.m > 12) throw DomainError("selfcheck needs 1 <= m <= 12");
  if (o.trials < 1) throw DomainError("selfcheck needs trials >= 1");
  validate_alpha(o.alpha);
  std::mt19937_64 rng(o.seed);
  const double a = o.alpha;
  const int m = o.m;
  const std::uint64_t mask = (std::uint64_t{1} << m) - 1;

  std::vector<Check> checks;
  auto check = [&](const std::string& name) -> Check& {
    for (auto& c : checks)
      if (c.name == name) return c;
    checks.push_back({name, 0, 0, ""});
    return checks.back();
  };
  auto record = [&](const std::string& name, bool ok, const std::function<std::string()>& replay) {
    Check& c = check(name);
    if (ok) {
      ++c.agree;
    } else {
      if (c.mismatch++ == 0) c.replay = replay();
    }
  };

  for (int t = 0; t < o.trials; ++t) {
    const auto ev = gen_evalues(rng, m, a);
    const auto pv = gen_pvalues(rng, m, a);
    const auto wv = gen_knockoff(rng, m);
    const Subset r(rng() & mask);
    const ValueVector E(ValueKind::evalue, ev), P(ValueKind::pvalue, pv),
        W(ValueKind::knockoff_stat, wv);

    const ECollection mean = mean_collection(E);
    auto fast = ebhbar_member_fast(ev, a, r);
    bool fast_member = fast.member;
    if (o.inject_fault && fast_member && !r.empty() && fast.margin <= 1e-9 / a) fast_member = false;
    record("ebhbar-member", fast_member == member(mean, Loss::fdp(), a, r).member,
           [&] { return replay_json("ebhbar-member", "evalue", ev, a, r); });
    record("ebhbar-largest",
           ebhbar_largest_fast(ev, a) == largest_member(mean, Loss::fdp(), a, natural_order(mean)),
           [&] { return replay_json("ebhbar-largest", "evalue", ev, a, std::nullopt); });
    record("eholm", eholm_fast(ev, a) == fwer_reject_set(mean, a),
           [&] { return replay_json("eholm", "evalue", ev, a, std::nullopt); });

    for (const auto& [name, coll] : {std::pair{"by", by_collection(P, a)},
                                     std::pair{"su", su_collection(P, a)}}) {
      const std::string mem = std::string("monotone-member-") + name;
      record(mem, monotone_member_fast(coll, pv, a, r).member == member(coll, Loss::fdp(), a, r).member,
             [&] { return replay_json(mem, "pvalue", pv, a, r); });
      const std::string big = std::string("monotone-largest-") + name;
      record(big,
             monotone_largest(coll, pv, a) ==
                 largest_member(coll, Loss::fdp(), a, order_by_pvalue_asc(pv)),
             [&] { return replay_json(big, "pvalue", pv, a, std::nullopt); });
    }

    const ECollection bhc = bh_collection(P, a);
    record("closedbh-rule", closedbh_member_rule(pv, a, r).member == member(bhc, Loss::fdp(), a, r).member,
           [&] { return replay_json("closedbh-rule", "pvalue", pv, a, r); });
    const double ka = std::max(a, 0.3);  // knockoffs need larger alpha to reject anything at small m
    const ECollection kc = knockoff_collection(W, ka);
    record("closedknockoff-rule",
           closedknockoff_member_rule(wv, ka, r).member == member(kc, Loss::fdp(), ka, r).member,
           [&] { return replay_json("closedknockoff-rule", "knockoff_stat", wv, ka, r); });

    const Subset ce = closed_variant(Method::closed_ebh, E, a).rejected;
    record("dominance-ebh",
           ebh(E, a).rejected.subset_of(ce) && ma_ebh(E, a).rejected.subset_of(ce),
           [&] { return replay_json("dominance-ebh", "evalue", ev, a, std::nullopt); });
    record("dominance-by", by(P, a).rejected.subset_of(closed_variant(Method::closed_by, P, a).rejected),
           [&] { return replay_json("dominance-by", "pvalue", pv, a, std::nullopt); });
    record("dominance-su", su(P, a).rejected.subset_of(closed_variant(Method::closed_su, P, a).rejected),
           [&] { return replay_json("dominance-su", "pvalue", pv, a, std::nullopt); });
    record("recovery-bh", bh(P, a).rejected == closed_variant(Method::closed_bh, P, a).rejected,
           [&] { return replay_json("recovery-bh", "pvalue", pv, a, std::nullopt); });
    record("recovery-knockoff",
           knockoff_filter(W, ka).rejected == closed_variant(Method::closed_knockoff, W, ka).rejected,
           [&] { return replay_json("recovery-knockoff", "knockoff_stat", wv, ka, std::nullopt); });
  }

  SelfcheckReport rep;
  std::ostringstream os;
  os << "selfcheck m=" << m << " trials=" << o.trials << " seed=" << o.seed
     << " alpha=" << fmt_short(a) << (o.inject_fault ? " (fault injected)" : "") << "\n";
  for (const auto& c : checks) {
    os << std::left << std::setw(24) << c.name << (c.mismatch ? "FAIL" : "ok  ") << "  agree="
       << c.agree << " mismatch=" << c.mismatch << "\n";
    if (c.mismatch) {
      os << "  replay: " << c.replay << "\n";
      rep.ok = false;
    }
  }
  os << (rep.ok ? "all checks passed" : "mismatches found") << "\n";
  rep.text = os.str();
  return rep;
}

}  // namespace eclosure::tools
