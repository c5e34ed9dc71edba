// qfc2 command line. `qfc2 --golden script.qfc` runs a script and diffs it with script.json.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "commands.hpp"

namespace fs = std::filesystem;
using namespace qfc2::cli;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Unified golden mode: missing .json is written, otherwise compared.
int golden(const fs::path& script, bool json) {
  const Outcome out = run_script(slurp(script), script.filename().string());
  const std::string got = out.report.dump(2) + "\n";
  fs::path expected = script;
  expected.replace_extension(".json");
  if (!fs::exists(expected)) {
    std::ofstream(expected, std::ios::binary) << got;
    std::cerr << "wrote " << expected.string() << "\n";
    return out.exit_code;
  }
  const std::string want = slurp(expected);
  if (want != got) {
    std::istringstream a(want), b(got);
    std::string la, lb;
    for (size_t n = 1;; ++n) {
      const bool ra = static_cast<bool>(std::getline(a, la)), rb = static_cast<bool>(std::getline(b, lb));
      if (!ra && !rb) break;
      if (!ra || !rb || la != lb) {
        std::cerr << expected.string() << ":" << n << ": golden mismatch\n  expected: " << (ra ? la : "<eof>")
                  << "\n  actual:   " << (rb ? lb : "<eof>") << "\n";
        break;
      }
    }
    return exit_usage;
  }
  std::cout << (json ? got : script.filename().string() + ": ok\n");
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  bool json = false;
  for (const auto& a : args) json = json || a == "--json";

  // golden mode bypasses subcommand parsing
  for (size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--golden") {
      try {
        return golden(args[i + 1], json);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
      }
    }
  }
  if (args.size() == 1 && args[0].size() > 4 && args[0].ends_with(".qfc")) {
    try {
      const Outcome out = run_script(slurp(args[0]), fs::path(args[0]).filename().string());
      std::cout << out.report.dump(2) << "\n";
      return out.exit_code;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return exit_usage;
    }
  }

  const Outcome out = run_command(Session{}, args);
  if (!out.help.empty()) {
    std::cout << out.help;
    return exit_ok;
  }
  if (json) {
    std::cout << out.report.dump(2) << "\n";
  } else {
    std::cout << render_text(out.report);
  }
  return out.exit_code;
}
