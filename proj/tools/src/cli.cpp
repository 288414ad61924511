#include "ovepg/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ovepg/errors.hpp"
#include "run_output.hpp"

namespace ovepg::cli {

namespace {

constexpr const char* kFooter = R"(Outputs (under <out>/<command>-<config hash>-s<seed>/):
  manifest.json   resolved config, seed, input digests, outputs, version, timestamps
  metrics.jsonl   one JSON object per epoch: epoch, nll, kl, total, lr, train_accuracy
                  (sweep-beta adds objective and beta)
  report.json     final metrics; identical across reruns of the same config and seed
  curves.csv      synth1d only: epoch,x,p_class0,p_class1,p_class2 on x = -6..6 step 0.05

Config files hold key=value lines (keys are long flag names), '#' starts a comment.
Flags given on the command line override config values.

Exit codes: 0 success, 1 parse or parameter error, 2 data error, 3 numerical abort.
Errors print one JSON line to stderr: {"error":<kind>,"code":<n>,"message":<text>}.
OVEPG_DATA_DIR sets the directory holding the default MNIST and EMNIST IDX files.)";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    while (key.starts_with('-')) key.erase(0, 1);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

std::vector<std::string> config_paths(const std::vector<std::string>& args) {
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
      paths.push_back(args[++i]);
    } else if (args[i].starts_with("--config=")) {
      paths.push_back(args[i].substr(9));
    }
  }
  return paths;
}

Json resolved_options(const CLI::App& sub) {
  Json cfg = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "out") continue;
    if (opt->get_expected_max() == 0) {
      cfg[name] = opt->count() > 0 && opt->as<bool>() ? "true" : "false";
    } else if (opt->count() > 0) {
      cfg[name] = opt->results().back();
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

int fail(std::ostream& err, const char* kind, int code, const std::string& message) {
  Json line{{"error", kind}, {"code", code}, {"message", message}};
  err << line.dump() << '\n';
  return code;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  const auto paths = config_paths(args);
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      ++i;
      continue;
    }
    if (args[i].starts_with("--config=")) continue;
    rest.push_back(args[i]);
  }
  if (paths.empty()) return rest;
  std::vector<std::string> injected;
  for (const auto& p : paths) {
    const auto tokens = read_config(p);
    injected.insert(injected.end(), tokens.begin(), tokens.end());
  }
  // Place config values right after the command name so explicit flags win.
  auto cmd = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return !a.starts_with('-'); });
  if (cmd == rest.end()) throw UsageError("--config given without a command");
  rest.insert(cmd + 1, injected.begin(), injected.end());
  return rest;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Experiments for one-vs-each classification with Polya-Gamma augmented fine-tuning.",
               "ovepg"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", OVEPG_VERSION);

  Commands commands(app);

  try {
    const auto paths = config_paths(raw_args);
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    CLI::App* sub = app.get_subcommands().front();
    Json config = resolved_options(*sub);
    return commands.run(sub->get_name(), config, paths, out, err);
  } catch (const CLI::Success& e) {
    // --help and --version.
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail(err, "parse", kParseError, e.what());
  } catch (const UsageError& e) {
    return fail(err, "parse", kParseError, e.what());
  } catch (const ParameterError& e) {
    return fail(err, "parameter", kParseError, e.what());
  } catch (const LoadError& e) {
    return fail(err, "data", kDataError, std::string(to_string(e.kind())) + ": " + e.what());
  } catch (const InputError& e) {
    return fail(err, "data", kDataError, e.what());
  } catch (const NumericalError& e) {
    return fail(err, "numerical", kNumericalError, e.what());
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace ovepg::cli
