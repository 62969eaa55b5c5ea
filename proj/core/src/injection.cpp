#include "skillmix/injection.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "skillmix/errors.hpp"
#include "skillmix/parallel.hpp"
#include "skillmix/rng.hpp"
#include "skillmix/text.hpp"

namespace skillmix {

std::size_t injection_count(std::size_t n, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ValidationError("injection fraction must lie in [0, 1]");
  const double x = fraction * static_cast<double>(n);
  auto count = static_cast<std::size_t>(std::floor(x));
  if (x - static_cast<double>(count) > 1.0 - 1e-9) ++count;
  return std::min(count, n);
}

std::vector<std::size_t> select_for_injection(const Dataset& dataset, const InjectionPlan& plan) {
  const std::size_t count = injection_count(dataset.size(), plan.fraction);
  const std::uint64_t salt = derive_seed(plan.seed, "inject");
  std::vector<std::tuple<std::uint64_t, std::string_view, std::size_t>> keyed;
  keyed.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    keyed.emplace_back(mix64(salt ^ fnv1a64(dataset[i].id)), dataset[i].id, i);
  }
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(count), keyed.end());
  std::vector<std::size_t> idx;
  idx.reserve(count);
  for (std::size_t j = 0; j < count; ++j) idx.push_back(std::get<2>(keyed[j]));
  std::sort(idx.begin(), idx.end());
  return idx;
}

Dataset inject(const Dataset& dataset, const InjectionPlan& plan, Provider& provider,
               const InjectionOptions& options) {
  if (dataset.empty()) throw PreconditionError("cannot inject into an empty dataset");
  const auto selected = select_for_injection(dataset, plan);
  const auto& lib = options.templates ? *options.templates : TemplateLibrary::shipped();
  const std::string template_name = plan.mode == Corruption::kBrev ? "inject_brev" : "inject_junk";

  Dataset out = dataset;
  parallel_for(selected.size(), options.workers, [&](std::size_t j) {
    GeneratedExample& ex = out[selected[j]];
    ChatRequest request;
    request.messages = {{Role::kUser, lib.render(template_name, {{"instruction", ex.instruction}})}};
    request.temperature = options.temperature;
    request.max_output_tokens = options.max_output_tokens;
    request.task_id = "inject:" + ex.id;
    const auto reply = provider.complete_chat(std::move(request));
    std::string response(trim(reply.content));
    if (response.empty()) throw MalformedResponse("empty regenerated response for record '" + ex.id + "'");
    ex.response = std::move(response);
    ex.corruption = plan.mode;
    ex.teacher = provider.config().model_id;
    ex.refined = false;
  });
  return out;
}

}  // namespace skillmix
