#include "nsp/reduction.hpp"

#include "nsp/errors.hpp"
#include "nsp/mfcc.hpp"

namespace nsp {

FeatureSequence stack_time_deltas(const FeatureSequence& f) { return add_deltas(f, 2); }

Eigen::Index reduced_dim(const Reducer& r) {
  return std::visit(
      [](const auto& m) -> Eigen::Index {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, KpcaModel>) {
          return m.n_components();
        } else {
          return m.params.code_dim();
        }
      },
      r);
}

FeatureSequence reduce_sequence(const Reducer& r, const FeatureSequence& f) {
  validate(f);
  FeatureSequence reduced;
  reduced.modality = f.modality;
  reduced.rate_hz = f.rate_hz;
  reduced.data = std::visit(
      [&](const auto& m) -> Eigen::MatrixXd {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, KpcaModel>) {
          return kpca_transform(m, f.data);
        } else {
          return autoencoder_encode(m, f.data);
        }
      },
      r);
  return stack_time_deltas(reduced);
}

}  // namespace nsp
