#pragma once

#include "nsp/autoencoder.hpp"
#include "nsp/feature_sequence.hpp"
#include "nsp/kpca.hpp"

#include <variant>

namespace nsp {

// Deltas and delta-deltas of a reduced sequence (39 -> 117, 6 -> 18).
// Throws TooShort below 5 frames.
FeatureSequence stack_time_deltas(const FeatureSequence& f);

using Reducer = std::variant<KpcaModel, AutoencoderModel>;

Eigen::Index reduced_dim(const Reducer& r);

// Frame-wise reduction followed by stack_time_deltas.
FeatureSequence reduce_sequence(const Reducer& r, const FeatureSequence& f);

}  // namespace nsp
