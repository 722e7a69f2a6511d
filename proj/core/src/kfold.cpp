#include <algorithm>

#include "voxmix/error.hpp"
#include "voxmix/pipeline.hpp"

namespace voxmix {

std::vector<std::vector<std::string>> kfold_split(std::vector<std::string> case_ids, std::size_t k,
                                                  std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold split needs k >= 2");
  if (k > case_ids.size()) {
    throw ConfigError("k-fold split: k = " + std::to_string(k) + " exceeds " +
                      std::to_string(case_ids.size()) + " cases");
  }
  std::sort(case_ids.begin(), case_ids.end());
  if (std::adjacent_find(case_ids.begin(), case_ids.end()) != case_ids.end()) {
    throw ConfigError("k-fold split: duplicate case ids");
  }
  auto rng = derive_case_rng(seed, "kfold");
  for (std::size_t i = case_ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(case_ids[i - 1], case_ids[j]);
  }
  std::vector<std::vector<std::string>> folds(k);
  for (std::size_t i = 0; i < case_ids.size(); ++i) folds[i % k].push_back(case_ids[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace voxmix
