#include "eclosure_tools/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "eclosure/io.hpp"
#include "eclosure_tools/commands.hpp"
#include "eclosure_tools/http.hpp"
#include "eclosure_tools/service.hpp"

namespace eclosure::tools {

namespace {

std::vector<std::pair<Method, Method>> parse_pairs(const std::string& text) {
  std::vector<std::pair<Method, Method>> pairs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw DomainError("pair '" + item + "' must look like classical:closed");
    pairs.emplace_back(parse_method(item.substr(0, colon)), parse_method(item.substr(colon + 1)));
  }
  return pairs;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DomainError("cannot write '" + path + "'");
  f << text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"e-closure multiple testing toolkit"};
  app.require_subcommand(1);

  std::string input, method_name = "closed-ebh", out_path, format_name, kind_name, set_text;
  std::string pairs_text;
  double alpha = 0.05, lambda = 0.5;
  std::vector<double> alphas{0.05, 0.1};
  bool exhaustive = false;

  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("input", input, "CSV or JSON input file")->required();
    cmd->add_option("--kind", kind_name, "value kind for an index,value header");
    cmd->add_option("--out", out_path, "write output here instead of stdout");
    cmd->add_option("--lambda", lambda, "Storey tuning parameter")->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "run one procedure on an input file");
  add_input(run);
  run->add_option("--method", method_name, "procedure name")->capture_default_str();
  run->add_option("--alpha", alpha, "nominal level")->capture_default_str();
  run->add_option("--format", format_name, "json, csv or text (default json)");
  run->add_flag("--exhaustive", exhaustive, "global max-cardinality member for closed methods");

  auto* compare = app.add_subcommand("compare", "discovery counts, classical vs closed");
  add_input(compare);
  compare->add_option("--alpha", alphas, "levels, repeated or comma separated")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--pairs", pairs_text, "classical:closed pairs, comma separated");
  compare->add_option("--format", format_name, "json, csv or text (default text)");

  auto* query = app.add_subcommand("query", "membership certificate for one set");
  add_input(query);
  query->add_option("--method", method_name, "closed procedure name")->capture_default_str();
  query->add_option("--alpha", alpha, "nominal level")->capture_default_str();
  query->add_option("--set", set_text, "comma-separated 1-based indices")->required();
  query->add_option("--format", format_name, "json, csv or text (default text)");

  std::string figure_kind;
  int fig_k = 20, fig_m = 20;
  auto* figure = app.add_subcommand("figure", "greedy eBH boundary profile as CSV");
  figure->add_option("kind", figure_kind, "figure kind (fig1)")->required();
  figure->add_option("--k", fig_k, "size of the rejected top block")->capture_default_str();
  figure->add_option("--m", fig_m, "number of hypotheses")->capture_default_str();
  figure->add_option("--alpha", alpha, "nominal level")->capture_default_str();
  figure->add_option("--out", out_path, "write output here instead of stdout");

  SelfcheckOptions sc;
  auto* selfcheck = app.add_subcommand("selfcheck", "shortcut vs brute-force equivalence");
  selfcheck->add_option("--m", sc.m, "hypotheses per instance (<= 12)")->capture_default_str();
  selfcheck->add_option("--trials", sc.trials, "random instances")->capture_default_str();
  selfcheck->add_option("--seed", sc.seed, "random seed")->capture_default_str();
  selfcheck->add_option("--alpha", sc.alpha, "nominal level")->capture_default_str();
  selfcheck->add_flag("--inject-fault", sc.inject_fault, "deliberately break one comparison");
  selfcheck->add_option("--out", out_path, "write the report here instead of stdout");

  std::string bind_host = "127.0.0.1", sessions_dir = "eclosure-sessions";
  int port = 8765;
  auto* serve = app.add_subcommand("serve", "JSON session API over HTTP");
  serve->add_option("--bind", bind_host, "listen address")->capture_default_str();
  serve->add_option("--port", port, "listen port (0 picks a free one)")->capture_default_str();
  serve->add_option("--sessions-dir", sessions_dir, "where session files live")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    auto load = [&] {
      std::optional<ValueKind> hint;
      if (!kind_name.empty()) hint = parse_value_kind(kind_name);
      return load_input(input, hint);
    };
    if (run->parsed()) {
      const Method method = parse_method(method_name);
      ValueVector values = kind_name.empty() ? load_input(input, input_kind(method)) : load();
      ClosedOptions options;
      options.lambda = lambda;
      options.exhaustive = exhaustive;
      const auto rec = cmd_run(method, values, alpha, options);
      emit(render(rec, parse_format(format_name.empty() ? "json" : format_name)), out_path, out);
    } else if (compare->parsed()) {
      const ValueVector values = load();
      const auto pairs = pairs_text.empty() ? default_pairs(values.kind()) : parse_pairs(pairs_text);
      const auto rows = cmd_compare(values, alphas, pairs, lambda);
      emit(render(rows, parse_format(format_name.empty() ? "text" : format_name)), out_path, out);
    } else if (query->parsed()) {
      const Method method = parse_method(method_name);
      ValueVector values = kind_name.empty() ? load_input(input, input_kind(method)) : load();
      const auto q = cmd_query(method, values, alpha, parse_set(set_text, values.size()), lambda);
      emit(render(q, parse_format(format_name.empty() ? "text" : format_name)), out_path, out);
    } else if (figure->parsed()) {
      emit(cmd_figure(figure_kind, fig_k, fig_m, alpha), out_path, out);
    } else if (selfcheck->parsed()) {
      const auto report = cmd_selfcheck(sc);
      emit(report.text, out_path, out);
      return report.ok ? 0 : 1;
    } else if (serve->parsed()) {
      SessionService service(sessions_dir);
      for (const auto& e : service.load_errors()) err << "warning: skipped session " << e << "\n";
      HttpFrontend http(service);
      const int bound = http.bind(bind_host, port);
      if (bound < 0) {
        err << "error: cannot bind " << bind_host << ":" << port << "\n";
        return 2;
      }
      out << "listening on http://" << bind_host << ":" << bound << std::endl;
      return http.run() ? 0 : 2;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace eclosure::tools
