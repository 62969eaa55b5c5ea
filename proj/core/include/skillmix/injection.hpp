#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "skillmix/dataset.hpp"
#include "skillmix/provider.hpp"
#include "skillmix/templates.hpp"

namespace skillmix {

struct InjectionPlan {
  Corruption mode = Corruption::kBrev;
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

struct InjectionOptions {
  double temperature = 1.0;
  int max_output_tokens = 4096;
  std::size_t workers = 4;
  /// Defaults to TemplateLibrary::shipped().
  const TemplateLibrary* templates = nullptr;
};

/// floor(fraction * n), never rounded up. A product within 1e-9 below an
/// integer counts as that integer, so 0.29 * 100 gives 29 rather than 28.
std::size_t injection_count(std::size_t n, double fraction);

/// Indices (ascending) of the records to corrupt: the injection_count
/// records whose ids hash lowest under the seed. Depends only on the ids
/// and the seed, not on record contents or order.
std::vector<std::size_t> select_for_injection(const Dataset& dataset, const InjectionPlan& plan);

/// Regenerates the selected responses with one single-turn call each
/// (task id "inject:<record id>") and flags them with the corruption.
/// Instructions and every other record stay byte-identical.
Dataset inject(const Dataset& dataset, const InjectionPlan& plan, Provider& provider,
               const InjectionOptions& options = {});

}  // namespace skillmix
