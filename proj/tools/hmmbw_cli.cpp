// hmmbw: command-line driver for training and inference.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error,
// 3 training stopped at --max-iterations without converging.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hmmbw/error.hpp"
#include "hmmbw/inference.hpp"
#include "hmmbw/io.hpp"
#include "hmmbw/model.hpp"
#include "hmmbw/oracle.hpp"
#include "hmmbw/training.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNotConverged = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string model_in;
  std::string model_out;
  std::string data;
  std::string data_out;
  std::string states_out;
  std::string emission;
  std::size_t states = 0;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  std::size_t length = 0;
  std::size_t index = 0;
  hmmbw::FitConfig fit;
};

hmmbw::EmissionSpec parse_emission(const std::string& text) {
  if (text == "gaussian") return hmmbw::EmissionSpec::gaussian();
  const std::string prefix = "categorical:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string count = text.substr(prefix.size());
    std::size_t used = 0;
    unsigned long m = 0;
    try {
      m = std::stoul(count, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == count.size() && !count.empty() && m >= 1) {
      return hmmbw::EmissionSpec::categorical(m);
    }
  }
  throw UsageError("--emission must be 'categorical:M' with M >= 1 or 'gaussian', got '" + text + "'");
}

std::vector<hmmbw::ObservationSequence> load_data(const Options& opt,
                                                  const hmmbw::HmmParameters& model) {
  return hmmbw::io::load_sequences(opt.data, model.emission_kind());
}

int run_init(const Options& opt) {
  const auto spec = parse_emission(opt.emission);
  hmmbw::io::save_model(hmmbw::random_init(opt.states, spec, opt.seed), opt.model_out);
  return kExitOk;
}

int run_train(const Options& opt) {
  try {
    hmmbw::validate(opt.fit);
  } catch (const hmmbw::ValidationError& e) {
    throw UsageError(e.what());
  }
  const auto model = hmmbw::io::load_model(opt.model_in);
  const auto data = load_data(opt, model);

  hmmbw::FitResult result;
  try {
    result = hmmbw::fit(model, data, opt.fit);
  } catch (const hmmbw::FitError& e) {
    hmmbw::FitResult partial{model, e.partial_trace(), e.partial_trace().size(), false};
    hmmbw::io::write_fit_report(std::cout, partial);
    throw;
  }
  hmmbw::io::write_fit_report(std::cout, result);
  hmmbw::io::save_model(result.params, opt.model_out);
  return result.converged ? kExitOk : kExitNotConverged;
}

int run_loglik(const Options& opt) {
  const auto model = hmmbw::io::load_model(opt.model_in);
  const auto data = load_data(opt, model);
  std::vector<double> per_sequence;
  double total = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    try {
      per_sequence.push_back(hmmbw::log_likelihood(model, data[k]));
    } catch (const hmmbw::Error& e) {
      throw hmmbw::InferenceError("sequence " + std::to_string(k) + ": " + e.what());
    }
    total += per_sequence.back();
  }
  std::cout << "total " << hmmbw::io::format_real(total) << '\n';
  for (std::size_t k = 0; k < per_sequence.size(); ++k) {
    std::cout << "sequence " << k << ' ' << hmmbw::io::format_real(per_sequence[k]) << '\n';
  }
  return kExitOk;
}

int run_decode(const Options& opt) {
  const auto model = hmmbw::io::load_model(opt.model_in);
  const auto data = load_data(opt, model);
  for (std::size_t k = 0; k < data.size(); ++k) {
    hmmbw::ViterbiResult best;
    try {
      best = hmmbw::viterbi(model, data[k]);
    } catch (const hmmbw::Error& e) {
      throw hmmbw::InferenceError("sequence " + std::to_string(k) + ": " + e.what());
    }
    for (std::size_t t = 0; t < best.path.size(); ++t) std::cout << (t ? " " : "") << best.path[t];
    std::cout << "\nlog_joint " << hmmbw::io::format_real(best.log_joint) << '\n';
  }
  return kExitOk;
}

int run_sample(const Options& opt) {
  const auto model = hmmbw::io::load_model(opt.model_in);
  hmmbw::Rng rng(opt.seed);
  std::vector<hmmbw::ObservationSequence> sequences;
  std::ostringstream states;
  for (std::size_t k = 0; k < opt.count; ++k) {
    auto draw = hmmbw::sample(model, opt.length, rng);
    for (std::size_t t = 0; t < draw.states.size(); ++t) states << (t ? " " : "") << draw.states[t];
    states << '\n';
    sequences.push_back(std::move(draw.obs));
  }
  if (opt.data_out.empty()) {
    std::cout << hmmbw::io::render_sequences(sequences);
  } else {
    hmmbw::io::save_sequences(sequences, opt.data_out);
  }
  if (!opt.states_out.empty()) {
    std::ofstream out(opt.states_out);
    if (!(out << states.str())) throw hmmbw::IoError("cannot write " + opt.states_out);
  }
  return kExitOk;
}

int run_oracle(const Options& opt) {
  const auto model = hmmbw::io::load_model(opt.model_in);
  const auto data = load_data(opt, model);
  if (opt.index >= data.size()) {
    throw UsageError("--index " + std::to_string(opt.index) + " but the file holds " +
                     std::to_string(data.size()) + " sequences");
  }
  const auto exact = hmmbw::oracle::enumerate_posteriors(model, data[opt.index]);
  std::cout << "likelihood " << hmmbw::io::format_real(exact.likelihood) << '\n';
  for (std::size_t t = 0; t < exact.gamma.rows(); ++t) {
    std::cout << "gamma " << t;
    for (double g : exact.gamma.row(t)) std::cout << ' ' << hmmbw::io::format_real(g);
    std::cout << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden Markov model training (Baum-Welch) and inference"};
  app.require_subcommand(1);
  Options opt;

  auto* init = app.add_subcommand("init", "Write a seeded random model");
  init->add_option("--states", opt.states, "Number of hidden states")
      ->required()
      ->check(CLI::PositiveNumber);
  init->add_option("--emission", opt.emission, "categorical:M or gaussian")->required();
  init->add_option("--seed", opt.seed, "Random seed");
  init->add_option("--model-out", opt.model_out, "Output model file")->required();

  auto* train = app.add_subcommand("train", "Fit a model with Baum-Welch");
  train->add_option("--model-in", opt.model_in, "Initial model file")->required();
  train->add_option("--data", opt.data, "Sequence file")->required();
  train->add_option("--model-out", opt.model_out, "Trained model file")->required();
  train->add_option("--max-iterations", opt.fit.max_iterations, "Iteration limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--tolerance", opt.fit.rel_tolerance, "Relative log-likelihood change to stop")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--transition-floor", opt.fit.transition_floor)->capture_default_str();
  train->add_option("--emission-floor", opt.fit.emission_floor)->capture_default_str();
  train->add_option("--variance-floor", opt.fit.variance_floor)->capture_default_str();
  train->add_option("--threads", opt.fit.threads, "Threads for the E-step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* loglik = app.add_subcommand("loglik", "Print total and per-sequence log-likelihoods");
  loglik->add_option("--model-in", opt.model_in)->required();
  loglik->add_option("--data", opt.data)->required();

  auto* decode = app.add_subcommand("decode", "Print the Viterbi path of each sequence");
  decode->add_option("--model-in", opt.model_in)->required();
  decode->add_option("--data", opt.data)->required();

  auto* sample = app.add_subcommand("sample", "Draw sequences from a model");
  sample->add_option("--model-in", opt.model_in)->required();
  sample->add_option("--count", opt.count, "Number of sequences")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sample->add_option("--length", opt.length, "Observations per sequence")
      ->required()
      ->check(CLI::PositiveNumber);
  sample->add_option("--seed", opt.seed, "Random seed");
  sample->add_option("--data-out", opt.data_out, "Sequence file (default: standard output)");
  sample->add_option("--states-out", opt.states_out, "Also write the hidden state paths");

  auto* oracle = app.add_subcommand("oracle", "Exact likelihood and posteriors by path enumeration");
  oracle->add_option("--model-in", opt.model_in)->required();
  oracle->add_option("--data", opt.data)->required();
  oracle->add_option("--index", opt.index, "Which sequence of the file")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*init) return run_init(opt);
    if (*train) return run_train(opt);
    if (*loglik) return run_loglik(opt);
    if (*decode) return run_decode(opt);
    if (*sample) return run_sample(opt);
    if (*oracle) return run_oracle(opt);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
