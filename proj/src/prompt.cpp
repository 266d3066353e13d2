#include "ecodse/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ecodse/errors.hpp"

namespace ecodse {

namespace {

std::string knob_listing(const DesignSpace& space) {
  std::ostringstream os;
  for (const auto& knob : space.knobs()) {
    os << "- " << knob.name << ": {";
    for (std::size_t i = 0; i < knob.domain.size(); ++i) {
      if (i) os << ", ";
      os << knob_value_to_string(knob.domain[i]);
    }
    os << "}\n";
  }
  return os.str();
}

std::string config_line(const Configuration& c) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (i) os << ", ";
    os << knob_value_to_string(c.values[i]);
  }
  os << ']';
  return os.str();
}

Configuration extreme_config(const DesignSpace& space, bool last) {
  Configuration c;
  for (const auto& knob : space.knobs())
    c.values.push_back(last ? knob.domain.back() : knob.domain.front());
  return c;
}

}  // namespace

std::string InContextPrompt::render() const {
  std::ostringstream os;
  os << "## Task\n" << task_description << "\n";
  if (!solution_examples.empty()) {
    os << "## Examples\n";
    for (const auto& [input, output] : solution_examples)
      os << "Input: " << input << "\nOutput: " << output << "\n";
    os << "\n";
  }
  if (!state_block.empty()) os << "## Current state\n" << state_block << "\n";
  os << "## Instructions\n" << task_instruction << "\n";
  return os.str();
}

InContextPrompt build_prompt(const DesignSpace& space, const std::vector<Configuration>& population,
                             const std::vector<double>& fitness, PromptMode mode, int n_solutions,
                             const PromptExtras& extras) {
  check(population.size() == fitness.size(), "build_prompt: population/fitness misaligned");
  check(n_solutions >= 1, "build_prompt: need at least one solution");

  InContextPrompt prompt;
  {
    std::ostringstream os;
    os << "You are exploring the pragma design space of a high-level-synthesis kernel. "
          "Each configuration assigns one value to every pragma knob; the goal is a set of "
          "configurations trading off low resource usage against low latency (a Pareto front). "
          "The knobs and their complete value domains are:\n"
       << knob_listing(space);
    prompt.task_description = os.str();
  }

  {
    const Configuration lo = extreme_config(space, false);
    const Configuration hi = extreme_config(space, true);
    std::ostringstream in;
    in << space.knobs().size() << " knobs as listed above";
    prompt.solution_examples.emplace_back(in.str() + ", cheapest variant", config_line(lo));
    prompt.solution_examples.emplace_back(in.str() + ", fastest variant", config_line(hi));
  }

  {
    std::ostringstream os;
    if (!population.empty()) {
      std::vector<std::size_t> order(population.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
      os << "Current population, best first (lower cost is better):\n";
      for (std::size_t i : order)
        os << config_line(population[i]) << "  cost=" << fitness[i] << "\n";
    }
    if (mode == PromptMode::AcoPheromone) {
      check(extras.pheromone != nullptr, "build_prompt: aco mode needs a pheromone matrix");
      os << "Pheromone concentrations per knob value (higher means more promising):\n";
      for (std::size_t g = 0; g < space.knobs().size(); ++g) {
        const auto& knob = space.knobs()[g];
        os << "- " << knob.name << ": ";
        for (std::size_t i = 0; i < knob.domain.size(); ++i) {
          if (i) os << ", ";
          os << knob_value_to_string(knob.domain[i]) << "=" << (*extras.pheromone)[g][i];
        }
        os << "\n";
      }
    }
    prompt.state_block = os.str();
  }

  {
    std::ostringstream os;
    switch (mode) {
      case PromptMode::Init:
        os << "Propose a diverse initial population covering the trade-off range. ";
        break;
      case PromptMode::GaOffspring:
        os << "Combine and mutate the listed parents to produce offspring likely to improve "
              "the front. ";
        break;
      case PromptMode::SaNeighbor:
        os << "Propose neighbor solutions: each should differ from one listed parent in only "
              "one or two knob values, stepping to nearby domain values. ";
        break;
      case PromptMode::AcoPheromone:
        os << "Sample solutions guided by the pheromone concentrations, favoring heavier "
              "values while keeping some exploration. ";
        break;
    }
    os << "Return exactly " << n_solutions << " solutions.\n"
       << "Reply with a fenced code block containing one solution per line, each a bracketed "
          "list with one value per knob in the order listed above, e.g.\n```\n"
       << config_line(extreme_config(space, false)) << "\n```\n"
       << "Every value must be taken verbatim from the knob's domain. No other text inside "
          "the block.";
    prompt.task_instruction = os.str();
  }
  return prompt;
}

namespace {

// Splits "[a, b, c]" into trimmed tokens; returns false if not bracketed.
bool split_bracket_list(const std::string& line, std::vector<std::string>& tokens) {
  const auto open = line.find('[');
  const auto close = line.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close <= open) return false;
  tokens.clear();
  std::string inner = line.substr(open + 1, close - open - 1);
  std::string token;
  std::stringstream ss(inner);
  while (std::getline(ss, token, ',')) {
    const auto b = token.find_first_not_of(" \t\"'");
    const auto e = token.find_last_not_of(" \t\"'");
    tokens.push_back(b == std::string::npos ? std::string() : token.substr(b, e - b + 1));
  }
  return !tokens.empty();
}

}  // namespace

std::vector<Configuration> parse_response(const std::string& text, const DesignSpace& space,
                                          int n_requested, Rng& pad_rng,
                                          ParseDiagnostics* diagnostics) {
  ParseDiagnostics diag;
  const std::size_t k = space.knobs().size();

  // Prefer the fenced block; fall back to scanning the whole reply.
  std::string body = text;
  const auto fence_open = text.find("```");
  if (fence_open != std::string::npos) {
    const auto content_start = text.find('\n', fence_open);
    const auto fence_close = text.find("```", fence_open + 3);
    if (content_start != std::string::npos && fence_close != std::string::npos &&
        content_start < fence_close)
      body = text.substr(content_start + 1, fence_close - content_start - 1);
  }

  std::vector<Configuration> accepted;
  auto consider = [&](const std::string& line) {
    if (static_cast<int>(accepted.size()) >= n_requested) return;
    std::vector<std::string> tokens;
    if (!split_bracket_list(line, tokens)) return;
    if (tokens.size() != k) {
      ++diag.dropped;
      return;
    }
    Configuration config;
    bool repaired = false;
    for (std::size_t g = 0; g < k; ++g) {
      const auto& domain = space.knobs()[g].domain;
      // Exact string match first (covers symbolic values).
      int found = -1;
      for (std::size_t i = 0; i < domain.size(); ++i)
        if (knob_value_to_string(domain[i]) == tokens[g]) {
          found = static_cast<int>(i);
          break;
        }
      if (found >= 0) {
        config.values.push_back(domain[found]);
        continue;
      }
      // Numeric repair: snap to the nearest domain value, ties to the smaller.
      double num = 0.0;
      bool numeric = false;
      try {
        std::size_t used = 0;
        num = std::stod(tokens[g], &used);
        numeric = used == tokens[g].size();
      } catch (...) {
      }
      int best = -1;
      if (numeric) {
        double best_dist = std::numeric_limits<double>::infinity();
        double best_value = 0.0;
        for (std::size_t i = 0; i < domain.size(); ++i) {
          if (!knob_value_is_numeric(domain[i])) continue;
          const double v = knob_value_number(domain[i]);
          const double d = std::abs(v - num);
          if (d < best_dist || (d == best_dist && v < best_value)) {
            best_dist = d;
            best_value = v;
            best = static_cast<int>(i);
          }
        }
      }
      if (best < 0) {
        config.values.clear();
        break;
      }
      config.values.push_back(domain[best]);
      repaired = true;
    }
    if (config.values.size() != k) {
      ++diag.dropped;
      return;
    }
    accepted.push_back(std::move(config));
    if (repaired) ++diag.repaired;
    else ++diag.valid;
  };

  std::stringstream ss(body);
  std::string line;
  while (std::getline(ss, line)) consider(line);
  if (accepted.empty() && body.size() != text.size()) {
    // Nothing inside the fence; scan the full reply once.
    std::stringstream full(text);
    while (std::getline(full, line)) consider(line);
  }

  if (accepted.empty()) {
    if (diagnostics) *diagnostics = diag;
    throw ParseError("parse_response: no parseable configuration in reply");
  }
  while (static_cast<int>(accepted.size()) < n_requested) {
    accepted.push_back(space.random_config(pad_rng));
    ++diag.padded;
  }
  if (diagnostics) *diagnostics = diag;
  return accepted;
}

}  // namespace ecodse
