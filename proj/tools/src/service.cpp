#include "eclosure_tools/service.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "eclosure/io.hpp"
#include "eclosure/shortcuts.hpp"
#include "eclosure_tools/commands.hpp"

namespace eclosure::tools {

namespace fs = std::filesystem;

int ApiError::http_status() const {
  switch (code_) {
    case Code::bad_request: return 400;
    case Code::not_found: return 404;
    case Code::alpha_locked: return 409;
    case Code::cap_exceeded: return 422;
  }
  return 500;
}

std::string ApiError::code_name() const {
  switch (code_) {
    case Code::bad_request: return "bad_request";
    case Code::not_found: return "not_found";
    case Code::alpha_locked: return "alpha_locked";
    case Code::cap_exceeded: return "cap_exceeded";
  }
  return "internal";
}

Json ApiError::body() const { return Json{{"code", code_name()}, {"message", what()}}; }

namespace {

ApiError bad_request(const std::string& msg) { return ApiError(ApiError::Code::bad_request, msg); }

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string new_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  std::ostringstream os;
  os << std::hex << rng();
  std::string s = os.str();
  return std::string(16 - s.size(), '0') + s;
}

// JSON has no infinities; they travel as strings, as in the input format.
Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double to_num(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw bad_request("expected a number");
}

Json set_json(Subset s) { return s.one_based(); }

Json cert_json(const MembershipCertificate& c) {
  return Json{{"member", c.member},
              {"witness", c.witness ? Json(c.witness->one_based()) : Json(nullptr)},
              {"margin", num(c.margin)},
              {"witness_e", num(c.witness_e)},
              {"witness_bound", num(c.witness_bound)}};
}

MembershipCertificate cert_from(const Json& j) {
  MembershipCertificate c;
  c.member = j.at("member").get<bool>();
  if (!j.at("witness").is_null()) c.witness = Subset::from_one_based(j.at("witness").get<std::vector<int>>());
  c.margin = to_num(j.at("margin"));
  c.witness_e = to_num(j.at("witness_e"));
  c.witness_bound = to_num(j.at("witness_bound"));
  return c;
}

Json record_json(const AuditRecord& r) {
  return Json{{"id", r.id},       {"kind", r.kind},
              {"loss", r.loss},   {"alpha", r.alpha},
              {"set", set_json(r.set)}, {"binding", r.kind == "finalize"},
              {"certificate", cert_json(r.certificate)}, {"at", r.at}};
}

AuditRecord record_from(const Json& j) {
  AuditRecord r;
  r.id = j.at("id").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.loss = j.at("loss").get<std::string>();
  r.alpha = j.at("alpha").get<double>();
  r.set = Subset::from_one_based(j.at("set").get<std::vector<int>>());
  r.certificate = cert_from(j.at("certificate"));
  r.at = j.value("at", "");
  return r;
}

const ECollection& coll(const Session& s) { return *s.collection; }

bool alpha_adjustable(const Session& s) { return coll(s).flags().alpha_independent; }

template <class F>
auto guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ApiError&) {
    throw;
  } catch (const CapExceeded& e) {
    throw ApiError(ApiError::Code::cap_exceeded, e.what());
  } catch (const FlagError& e) {
    throw ApiError(ApiError::Code::alpha_locked, e.what());
  } catch (const std::exception& e) {
    throw bad_request(e.what());
  }
}

double body_alpha(const Session& s, const Json& body) {
  if (!body.contains("alpha")) return s.alpha;
  if (!body["alpha"].is_number()) throw bad_request("'alpha' must be a number");
  const double a = body["alpha"].get<double>();
  validate_alpha(a);
  if (a != s.created_alpha && !alpha_adjustable(s)) {
    throw ApiError(ApiError::Code::alpha_locked,
                   "the " + to_string(s.method) +
                       " collection is built at alpha=" + std::to_string(s.created_alpha) +
                       " and is not valid at other levels");
  }
  return a;
}

Loss body_loss(const Json& body, double alpha, const char* dflt) {
  if (body.contains("loss") && !body["loss"].is_string()) throw bad_request("'loss' must be a string");
  return Loss::parse(body.value("loss", std::string(dflt)), alpha);
}

Subset body_set(const Session& s, const Json& body) {
  if (!body.contains("set")) throw bad_request("missing 'set'");
  const Json& arr = body["set"];
  if (arr.is_string()) return parse_set(arr.get<std::string>(), s.values.size());
  if (!arr.is_array()) throw bad_request("'set' must be an array of 1-based indices");
  std::vector<int> idx;
  for (const auto& v : arr) {
    if (!v.is_number_integer()) throw bad_request("'set' entries must be integers");
    const int i = v.get<int>();
    if (i < 1 || i > s.values.size())
      throw bad_request("set index " + std::to_string(i) + " outside 1.." + std::to_string(s.values.size()));
    idx.push_back(i);
  }
  return Subset::from_one_based(idx);
}

// FDR has a polynomial path at any m; other losses need enumeration.
MembershipCertificate verify(const Session& s, const Loss& loss, double alpha, Subset r) {
  if (loss.kind() == Loss::Kind::fdp) return certify_fdr(s.method, coll(s), alpha, r);
  if (s.values.size() > member_cap()) {
    throw ApiError(ApiError::Code::cap_exceeded,
                   "loss " + loss.spec() + " needs exhaustive membership, m=" +
                       std::to_string(s.values.size()) + " exceeds the cap " +
                       std::to_string(member_cap()));
  }
  return member(coll(s), loss, alpha, r);
}

Subset largest_fdr(const Session& s, double alpha) {
  const ECollection& e = coll(s);
  if (e.flags().mean_type && e.flags().alpha_independent && !e.restricted())
    return ebhbar_largest_fast(e.base(), alpha);
  return closed_variant(s.method, s.values, alpha, ClosedOptions{s.lambda}).rejected;
}

Json summary(const Session& s) {
  Json fwer;
  try {
    fwer = set_json(fwer_reject_set(coll(s), s.alpha));
  } catch (const CapExceeded&) {
    fwer = nullptr;
  }
  const bool fwer_nonempty = fwer.is_array() && !fwer.empty();
  return Json{{"id", s.id},
              {"method", to_string(s.method)},
              {"kind", to_string(s.values.kind())},
              {"m", s.values.size()},
              {"alpha", s.alpha},
              {"alpha_adjustable", alpha_adjustable(s)},
              {"largest", set_json(largest_fdr(s, s.alpha))},
              {"fwer_set", fwer},
              {"fwer_nonempty", fwer_nonempty},
              {"fingerprint", coll(s).fingerprint_hex()},
              {"audit_size", s.audit.size()},
              {"created", s.created},
              {"updated", s.updated}};
}

AuditRecord& append(Session& s, std::string kind, const Loss& loss, double alpha, Subset set,
                    MembershipCertificate cert) {
  const std::string at = now_utc();
  s.audit.push_back({"c" + std::to_string(s.audit.size() + 1), std::move(kind), loss.spec(), alpha,
                     set, std::move(cert), at});
  s.updated = at;
  return s.audit.back();
}

void build_collection(Session& s) {
  s.collection = closed_collection(s.method == Method::eholm ? Method::closed_ebh : s.method,
                                   s.values, s.created_alpha, s.lambda);
}

}  // namespace

Json session_to_json(const Session& s) {
  Json values = Json::array();
  for (double v : s.values.values()) values.push_back(num(v));
  Json audit = Json::array();
  for (const auto& r : s.audit) audit.push_back(record_json(r));
  return Json{{"id", s.id},
              {"method", to_string(s.method)},
              {"lambda", s.lambda},
              {"created_alpha", s.created_alpha},
              {"alpha", s.alpha},
              {"kind", to_string(s.values.kind())},
              {"values", values},
              {"fingerprint", coll(s).fingerprint_hex()},
              {"created", s.created},
              {"updated", s.updated},
              {"audit", audit}};
}

Session session_from_json(const Json& j) {
  Session s;
  s.id = j.at("id").get<std::string>();
  s.method = parse_method(j.at("method").get<std::string>());
  s.lambda = j.at("lambda").get<double>();
  s.created_alpha = j.at("created_alpha").get<double>();
  s.alpha = j.at("alpha").get<double>();
  std::vector<double> v;
  for (const auto& x : j.at("values")) v.push_back(to_num(x));
  s.values = ValueVector(parse_value_kind(j.at("kind").get<std::string>()), std::move(v));
  s.created = j.value("created", "");
  s.updated = j.value("updated", "");
  build_collection(s);
  if (coll(s).fingerprint_hex() != j.at("fingerprint").get<std::string>())
    throw std::runtime_error("rebuilt collection fingerprint differs from the stored one");
  // Replay: every stored verdict must come out the same on the rebuilt collection.
  for (const auto& rj : j.at("audit")) {
    AuditRecord r = record_from(rj);
    const auto cert = verify(s, Loss::parse(r.loss, r.alpha), r.alpha, r.set);
    if (cert.member != r.certificate.member)
      throw std::runtime_error("replay of " + r.id + " gives a different verdict");
    s.audit.push_back(std::move(r));
  }
  return s;
}

SessionService::SessionService(std::string sessions_dir) : dir_(std::move(sessions_dir)) {
  if (!dir_.empty()) {
    fs::create_directories(dir_);
    load_all();
  }
}

void SessionService::load_all() {
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    try {
      std::ifstream in(entry.path());
      Json j = Json::parse(in);
      auto slot = std::make_shared<Slot>();
      slot->session = session_from_json(j);
      sessions_[slot->session.id] = slot;
    } catch (const std::exception& e) {
      load_errors_.push_back(entry.path().string() + ": " + e.what());
    }
  }
}

void SessionService::persist(const Session& s) const {
  if (dir_.empty()) return;
  const fs::path target = fs::path(dir_) / (s.id + ".json");
  const fs::path tmp = fs::path(dir_) / (s.id + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << session_to_json(s).dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::shared_ptr<SessionService::Slot> SessionService::find(const std::string& id) const {
  std::lock_guard lock(map_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ApiError(ApiError::Code::not_found, "no session '" + id + "'");
  return it->second;
}

Json SessionService::create(const Json& payload) {
  return guard([&] {
    if (!payload.is_object()) throw bad_request("payload must be a JSON object");
    if (!payload.contains("method") || !payload["method"].is_string())
      throw bad_request("missing 'method'");
    if (!payload.contains("alpha") || !payload["alpha"].is_number())
      throw bad_request("missing numeric 'alpha'");
    if (!payload.contains("values")) throw bad_request("missing 'values'");
    Session s;
    s.method = parse_method(payload["method"].get<std::string>());
    if (!is_closed(s.method) && s.method != Method::eholm)
      throw bad_request("sessions need a closed method or eholm");
    s.created_alpha = s.alpha = payload["alpha"].get<double>();
    validate_alpha(s.alpha);
    if (payload.contains("lambda")) s.lambda = to_num(payload["lambda"]);
    const ValueKind kind = input_kind(s.method);
    Json data{{"kind", payload.value("kind", to_string(kind))}, {"values", payload["values"]}};
    s.values = parse_json_input(data.dump(), kind, "payload");
    build_collection(s);
    s.id = new_id();
    s.created = s.updated = now_utc();
    Json out = summary(s);
    persist(s);
    auto slot = std::make_shared<Slot>();
    slot->session = std::move(s);
    std::lock_guard lock(map_mutex_);
    sessions_[slot->session.id] = slot;
    return out;
  });
}

Json SessionService::list() const {
  std::lock_guard lock(map_mutex_);
  Json out = Json::array();
  for (const auto& [id, slot] : sessions_) {
    std::shared_lock sl(slot->mutex);
    out.push_back(Json{{"id", id},
                       {"method", to_string(slot->session.method)},
                       {"m", slot->session.values.size()},
                       {"alpha", slot->session.alpha}});
  }
  return out;
}

Json SessionService::get(const std::string& id) const {
  auto slot = find(id);
  std::shared_lock lock(slot->mutex);
  return guard([&] { return summary(slot->session); });
}

Json SessionService::membership(const std::string& id, const Json& body) {
  auto slot = find(id);
  std::unique_lock lock(slot->mutex);
  return guard([&] {
    Session& s = slot->session;
    const double alpha = body_alpha(s, body);
    const Loss loss = body_loss(body, alpha, "fdr");
    const Subset r = body_set(s, body);
    auto cert = verify(s, loss, alpha, r);
    const auto& rec = append(s, "query", loss, alpha, r, cert);
    persist(s);
    return record_json(rec);
  });
}

Json SessionService::switch_loss(const std::string& id, const Json& body) {
  auto slot = find(id);
  std::unique_lock lock(slot->mutex);
  return guard([&] {
    Session& s = slot->session;
    const double alpha = body_alpha(s, body);
    if (!body.contains("loss")) throw bad_request("missing 'loss'");
    const Loss loss = body_loss(body, alpha, "fdr");
    Subset set;
    if (loss.kind() == Loss::Kind::fdp) {
      set = largest_fdr(s, alpha);
    } else if (loss.kind() == Loss::Kind::kfwer && loss.k() == 1) {
      set = fwer_reject_set(coll(s), alpha);
    } else {
      if (s.values.size() > member_cap())
        throw ApiError(ApiError::Code::cap_exceeded, "loss " + loss.spec() + " needs m <= cap");
      set = largest_member(coll(s), loss, alpha, natural_order(coll(s)));
    }
    auto cert = verify(s, loss, alpha, set);
    const auto& rec = append(s, "switch", loss, alpha, set, cert);
    persist(s);
    return record_json(rec);
  });
}

Json SessionService::set_alpha(const std::string& id, const Json& body) {
  auto slot = find(id);
  std::unique_lock lock(slot->mutex);
  return guard([&] {
    Session& s = slot->session;
    if (!body.contains("alpha")) throw bad_request("missing 'alpha'");
    const double alpha = body_alpha(s, body);
    s.alpha = alpha;
    const Subset largest = largest_fdr(s, alpha);
    append(s, "alpha", Loss::fdp(), alpha, largest, verify(s, Loss::fdp(), alpha, largest));
    persist(s);
    return summary(s);
  });
}

Json SessionService::finalize(const std::string& id, const Json& body) {
  auto slot = find(id);
  std::unique_lock lock(slot->mutex);
  return guard([&] {
    Session& s = slot->session;
    const double alpha = body_alpha(s, body);
    const Loss loss = body_loss(body, alpha, "fdr");
    const Subset r = body_set(s, body);
    // Re-verify every binding step together with the new one.
    Json steps = Json::array();
    bool prior_ok = true;
    for (const auto& rec : s.audit) {
      if (rec.kind != "finalize") continue;
      auto cert = verify(s, Loss::parse(rec.loss, rec.alpha), rec.alpha, rec.set);
      prior_ok = prior_ok && cert.member;
      Json j = record_json(rec);
      j["certificate"] = cert_json(cert);
      steps.push_back(j);
    }
    const auto cert = verify(s, loss, alpha, r);
    Json out{{"accepted", prior_ok && cert.member}, {"certificate", cert_json(cert)}};
    if (prior_ok && cert.member) {
      const auto& rec = append(s, "finalize", loss, alpha, r, cert);
      steps.push_back(record_json(rec));
      out["entry"] = record_json(rec);
      persist(s);
    } else {
      out["reason"] = cert.member ? "a prior finalized step no longer verifies"
                                  : "the set is not a member of the session collection";
    }
    out["audit"] = Json{{"fingerprint", coll(s).fingerprint_hex()},
                        {"passed", prior_ok},
                        {"steps", steps}};
    return out;
  });
}

Json SessionService::audit(const std::string& id) const {
  auto slot = find(id);
  std::shared_lock lock(slot->mutex);
  return guard([&] {
    const Session& s = slot->session;
    Json entries = Json::array();
    bool passed = true;
    for (const auto& rec : s.audit) {
      entries.push_back(record_json(rec));
      if (rec.kind == "finalize") passed = passed && rec.certificate.member;
    }
    return Json{{"id", s.id},
                {"fingerprint", coll(s).fingerprint_hex()},
                {"passed", passed},
                {"entries", entries}};
  });
}

Json SessionService::bound(const std::string& id, const std::string& set_text) const {
  auto slot = find(id);
  std::shared_lock lock(slot->mutex);
  return guard([&] {
    const Session& s = slot->session;
    const Subset r = parse_set(set_text, s.values.size());
    if (s.values.size() > member_cap())
      throw ApiError(ApiError::Code::cap_exceeded, "true-discovery bounds need m <= cap");
    Json out{{"set", set_json(r)},
             {"alpha", s.alpha},
             {"true_discovery_bound", true_discovery_bound(coll(s), s.alpha, r)}};
    if (alpha_adjustable(s)) {
      out["critical_alpha"] = num(critical_alpha(coll(s), Loss::fdp(), r));
    } else {
      out["critical_alpha"] = nullptr;
      out["note"] = "critical alpha needs an alpha-independent collection";
    }
    return out;
  });
}

}  // namespace eclosure::tools
