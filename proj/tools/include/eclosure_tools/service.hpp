#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "eclosure/engine.hpp"
#include "eclosure/procedures.hpp"
#include "json.hpp"

namespace eclosure::tools {

using Json = nlohmann::ordered_json;

class ApiError : public std::runtime_error {
 public:
  enum class Code { bad_request, not_found, alpha_locked, cap_exceeded };

  ApiError(Code code, const std::string& message) : std::runtime_error(message), code_(code) {}
  Code code() const { return code_; }
  int http_status() const;
  std::string code_name() const;
  Json body() const;

 private:
  Code code_;
};

struct AuditRecord {
  std::string id;    // "c<n>", unique within a session
  std::string kind;  // query, switch, alpha, finalize
  std::string loss;  // Loss::spec() form
  double alpha = 0.0;
  Subset set;
  MembershipCertificate certificate;
  std::string at;  // UTC timestamp
};

struct Session {
  std::string id;
  Method method = Method::closed_ebh;
  double lambda = 0.5;
  double created_alpha = 0.0;  // level the collection was built at
  double alpha = 0.0;          // current working level
  ValueVector values{ValueKind::evalue, {0.0}};  // replaced when the session is built
  std::optional<ECollection> collection;
  std::vector<AuditRecord> audit;
  std::string created;
  std::string updated;
};

// Session API behind the HTTP frontend. Every method takes and returns JSON and
// throws ApiError; the HTTP layer only routes. With a nonempty sessions_dir
// every mutation is written to <dir>/<id>.json (temp file plus rename), and
// existing files are replayed on construction.
class SessionService {
 public:
  explicit SessionService(std::string sessions_dir = "");

  Json create(const Json& payload);
  Json list() const;
  Json get(const std::string& id) const;
  Json membership(const std::string& id, const Json& body);
  Json switch_loss(const std::string& id, const Json& body);
  Json set_alpha(const std::string& id, const Json& body);
  Json finalize(const std::string& id, const Json& body);
  Json audit(const std::string& id) const;
  Json bound(const std::string& id, const std::string& set_text) const;

  // Files that failed to load or whose replay disagreed with the stored verdicts.
  const std::vector<std::string>& load_errors() const { return load_errors_; }

 private:
  struct Slot {
    mutable std::shared_mutex mutex;
    Session session;
  };

  std::shared_ptr<Slot> find(const std::string& id) const;
  void persist(const Session& s) const;
  void load_all();

  std::string dir_;
  mutable std::mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::vector<std::string> load_errors_;
};

// Session file format; exposed for tests of the replay path.
Json session_to_json(const Session& s);
Session session_from_json(const Json& j);

}  // namespace eclosure::tools
