// hadamard_cli: solve Hadamard fractional variational problems from JSON configs.
//
//   hadamard_cli solve --config <path> [--k <int>] [--N <int>] [--out <path>]
//   hadamard_cli study --config <path> --k-list a,b,c [--n-list a,b] [--out <path>]
//
// Exit status: 0 success, 2 config error, 3 solver did not converge,
// 4 evaluation error.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "hadamard/errors.hpp"
#include "hadamard/runner.hpp"

namespace {

int status(hadamard::ExitStatus s) { return static_cast<int>(s); }

void print_summary(const hadamard::SolveReport& r) {
  std::printf("k=%d N=%d alpha=%g\n", r.config.k, r.config.N, r.config.alpha);
  std::printf("J_approx        %.10e\n", r.J_approx);
  std::printf("iterations      %d\n", r.iterations);
  std::printf("converged       %s\n", r.converged ? "yes" : "no");
  std::printf("gradient_norm   %.3e\n", r.gradient_norm);
  if (!r.diagnostic.empty()) std::printf("diagnostic      %s\n", r.diagnostic.c_str());
  if (r.E_k) std::printf("E_k             %.9f\n", *r.E_k);
  if (r.bound_diagnostic) std::printf("bound           %.6e\n", *r.bound_diagnostic);
  std::printf("seconds         %.3f\n", r.seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct-transcription solver for Hadamard fractional variational problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> k_override;
  std::optional<int> n_override;
  std::optional<std::string> out_override;

  auto* solve = app.add_subcommand("solve", "Solve one configured problem");
  solve->add_option("--config", config_path, "JSON run configuration")->required();
  solve->add_option("--k", k_override, "Number of grid nodes (overrides config)");
  solve->add_option("--N", n_override, "Expansion order (overrides config)");
  solve->add_option("--out", out_override, "CSV output path (overrides config)");

  std::vector<int> k_list;
  std::vector<int> n_list;
  auto* study = app.add_subcommand("study", "Convergence study over k and N");
  study->add_option("--config", config_path, "JSON run configuration")->required();
  study->add_option("--k-list", k_list, "Comma-separated grid sizes")->delimiter(',')->required();
  study->add_option("--n-list", n_list, "Comma-separated expansion orders (default: config N)")
      ->delimiter(',');
  study->add_option("--out", out_override, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return status(hadamard::ExitStatus::ConfigError);
  }

  try {
    hadamard::RunConfig config = hadamard::load_config(config_path);
    if (k_override) config.k = *k_override;
    if (n_override) config.N = *n_override;

    if (*solve) {
      if (out_override) config.output_path = *out_override;
      hadamard::validate(config);
      const auto report = hadamard::run_solve(config);
      print_summary(report);
      return status(report.converged ? hadamard::ExitStatus::Success
                                     : hadamard::ExitStatus::NonConvergence);
    }

    if (n_list.empty()) n_list.push_back(config.N);
    const auto rows = hadamard::convergence_study(config, k_list, n_list);
    bool all_converged = true;
    std::printf("%6s %4s %16s %16s %10s %s\n", "k", "N", "E_k", "J_approx", "iterations", "converged");
    for (const auto& r : rows) {
      std::printf("%6d %4d %16.9e %16.9e %10d %d\n", r.k, r.N, r.E_k, r.J_approx, r.iterations,
                  r.converged ? 1 : 0);
      all_converged = all_converged && r.converged;
    }
    if (out_override) hadamard::write_study_csv(rows, *out_override);
    return status(all_converged ? hadamard::ExitStatus::Success
                                : hadamard::ExitStatus::NonConvergence);
  } catch (const hadamard::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return status(hadamard::ExitStatus::ConfigError);
  } catch (const hadamard::EvalError& e) {
    std::cerr << "evaluation error: " << e.what() << '\n';
    return status(hadamard::ExitStatus::EvaluationError);
  } catch (const hadamard::DomainError& e) {
    std::cerr << "evaluation error: " << e.what() << '\n';
    return status(hadamard::ExitStatus::EvaluationError);
  } catch (const std::runtime_error& e) {
    // Unwritable output path.
    std::cerr << "output error: " << e.what() << '\n';
    return status(hadamard::ExitStatus::ConfigError);
  }
}
