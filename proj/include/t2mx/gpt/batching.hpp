#pragma once

#include <cstdint>
#include <vector>

#include "t2mx/core/clip.hpp"

namespace t2mx::gpt {

using BatchPlan = std::vector<std::vector<std::size_t>>;

/// One epoch of sample indices split into batches so that every batch holds at
/// least one sample annotated with each modality and every sample appears
/// exactly once. There are ceil(N / batch_size) batches of balanced size; when
/// a modality is annotated on fewer samples than that, fewer (larger) batches
/// are emitted. Deterministic in `seed`. Throws kNoData when
/// some modality is annotated nowhere and kConfig for batch_size < 1.
BatchPlan make_batches(const std::vector<core::ModalityMask>& annotation, int batch_size, std::uint64_t seed);

/// True when each batch covers every modality.
bool covers_all_modalities(const BatchPlan& plan, const std::vector<core::ModalityMask>& annotation);

}  // namespace t2mx::gpt
