#pragma once

#include "nsp/autoencoder.hpp"
#include "nsp/gru_model.hpp"
#include "nsp/kpca.hpp"
#include "nsp/standardizer.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace nsp::datakit {

// Named dense tensors plus string metadata, stored as JSON with
// round-trip precision. Vectors are kept as n x 1 tensors.
struct ModelContainer {
  std::string kind;
  std::map<std::string, std::string> meta;
  std::map<std::string, Eigen::MatrixXd> tensors;

  void put(const std::string& name, const Eigen::MatrixXd& t) { tensors[name] = t; }
  // Throws CorruptFile when the tensor is absent.
  const Eigen::MatrixXd& tensor(const std::string& name) const;
  const std::string& meta_value(const std::string& key) const;

  std::string to_json() const;
  static ModelContainer from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  // Throws MissingArtifact if the file is absent, CorruptFile if it is not
  // a container of kind `expected_kind` (empty accepts any).
  static ModelContainer load(const std::filesystem::path& path, std::string_view expected_kind = {});
};

// Each pack_* writes tensors under `prefix`; unpack_* reads them back.
void pack(ModelContainer& c, const std::string& prefix, const Standardizer& s);
Standardizer unpack_standardizer(const ModelContainer& c, const std::string& prefix);

void pack(ModelContainer& c, const std::string& prefix, const ModelParams& m);
ModelParams unpack_model(const ModelContainer& c, const std::string& prefix);

void pack(ModelContainer& c, const std::string& prefix, const KpcaModel& m);
KpcaModel unpack_kpca(const ModelContainer& c, const std::string& prefix);

void pack(ModelContainer& c, const std::string& prefix, const AutoencoderModel& m);
AutoencoderModel unpack_autoencoder(const ModelContainer& c, const std::string& prefix);

}  // namespace nsp::datakit
