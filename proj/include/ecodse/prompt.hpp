#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ecodse/design_space.hpp"
#include "ecodse/rng.hpp"

namespace ecodse {

enum class PromptMode { Init, GaOffspring, SaNeighbor, AcoPheromone };

/// In-context prompt: task description (domain knowledge and knob listing),
/// worked input/output examples, the output-format contract, and the current
/// search state.
struct InContextPrompt {
  std::string task_description;
  std::vector<std::pair<std::string, std::string>> solution_examples;
  std::string task_instruction;
  std::string state_block;

  std::string render() const;
};

struct PromptExtras {
  const std::vector<std::vector<double>>* pheromone = nullptr;  // AcoPheromone mode
};

/// Builds the mode-specific prompt. The rendered text always declares every
/// knob name, its full domain, the requested solution count and the exact
/// machine-parseable reply grammar. Population entries are listed best-first
/// by fitness (lower cost first).
InContextPrompt build_prompt(const DesignSpace& space, const std::vector<Configuration>& population,
                             const std::vector<double>& fitness, PromptMode mode, int n_solutions,
                             const PromptExtras& extras = {});

struct ParseDiagnostics {
  int valid = 0;
  int repaired = 0;
  int dropped = 0;
  int padded = 0;
};

/// Extracts bracketed value lists from the reply (fenced block preferred),
/// snaps stray numerics to the nearest domain value (ties to the smaller),
/// drops what cannot be fixed and pads shortfalls with seeded random valid
/// configurations. Throws ParseError when nothing at all is parseable.
std::vector<Configuration> parse_response(const std::string& text, const DesignSpace& space,
                                          int n_requested, Rng& pad_rng,
                                          ParseDiagnostics* diagnostics = nullptr);

}  // namespace ecodse
