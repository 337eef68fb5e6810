#include "nsp/datakit/container.hpp"

#include "nsp/datakit/nspf.hpp"
#include "nsp/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace nsp::datakit {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "nsp-model-1";

std::string number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_number(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw CorruptFileError("model container: bad number for '" + key + "'", 0);
}

}  // namespace

const Eigen::MatrixXd& ModelContainer::tensor(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) throw CorruptFileError("model container: missing tensor '" + name + "'", 0);
  return it->second;
}

const std::string& ModelContainer::meta_value(const std::string& key) const {
  const auto it = meta.find(key);
  if (it == meta.end()) throw CorruptFileError("model container: missing meta '" + key + "'", 0);
  return it->second;
}

std::string ModelContainer::to_json() const {
  json j;
  j["format"] = kFormat;
  j["kind"] = kind;
  j["meta"] = meta;
  json ts = json::object();
  for (const auto& [name, t] : tensors) {
    std::vector<double> data(static_cast<std::size_t>(t.size()));
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        const double v = t(r, c);
        if (!std::isfinite(v)) fail(ErrorKind::NonFinite, "model container: tensor '" + name + "' is not finite");
        data[static_cast<std::size_t>(r * t.cols() + c)] = v;
      }
    }
    ts[name] = {{"rows", t.rows()}, {"cols", t.cols()}, {"data", std::move(data)}};
  }
  j["tensors"] = std::move(ts);
  return j.dump(1) + "\n";
}

ModelContainer ModelContainer::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != kFormat) throw CorruptFileError("not a model container", 0);
    ModelContainer c;
    c.kind = j.at("kind").get<std::string>();
    c.meta = j.at("meta").get<std::map<std::string, std::string>>();
    for (const auto& [name, t] : j.at("tensors").items()) {
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      const auto data = t.at("data").get<std::vector<double>>();
      if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw CorruptFileError("model container: tensor '" + name + "' has inconsistent size", 0);
      }
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index k = 0; k < cols; ++k) m(r, k) = data[static_cast<std::size_t>(r * cols + k)];
      }
      c.tensors.emplace(name, std::move(m));
    }
    return c;
  } catch (const json::exception& e) {
    throw CorruptFileError(std::string("model container: ") + e.what(), 0);
  }
}

void ModelContainer::save(const std::filesystem::path& path) const { write_text_file(path, to_json()); }

ModelContainer ModelContainer::load(const std::filesystem::path& path, std::string_view expected_kind) {
  ModelContainer c = from_json(read_text_file(path));
  if (!expected_kind.empty() && c.kind != expected_kind) {
    throw CorruptFileError("model container " + path.string() + " holds '" + c.kind + "', expected '" +
                               std::string(expected_kind) + "'",
                           0);
  }
  return c;
}

void pack(ModelContainer& c, const std::string& prefix, const Standardizer& s) {
  c.put(prefix + "mean", s.mean.transpose());
  c.put(prefix + "scale", s.scale.transpose());
}

Standardizer unpack_standardizer(const ModelContainer& c, const std::string& prefix) {
  Standardizer s;
  s.mean = c.tensor(prefix + "mean").col(0).transpose();
  s.scale = c.tensor(prefix + "scale").col(0).transpose();
  if (s.mean.size() != s.scale.size()) throw CorruptFileError("model container: standardizer size mismatch", 0);
  return s;
}

void pack(ModelContainer& c, const std::string& prefix, const ModelParams& m) {
  ModelParams::zip([&](const char* name, const auto& t) { c.put(prefix + name, t); }, m);
  c.meta[prefix + "pooling"] = std::string(to_string(m.pooling));
  c.meta[prefix + "dropout_rate"] = number(m.dropout_rate);
}

ModelParams unpack_model(const ModelContainer& c, const std::string& prefix) {
  ModelParams m;
  ModelParams::zip(
      [&](const char* name, auto& t) {
        const Eigen::MatrixXd& src = c.tensor(prefix + name);
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Eigen::VectorXd>) {
          if (src.cols() != 1) throw CorruptFileError("model container: '" + prefix + name + "' is not a vector", 0);
          t = src.col(0);
        } else {
          t = src;
        }
      },
      m);
  try {
    m.pooling = parse_pooling(c.meta_value(prefix + "pooling"));
  } catch (const CorruptFileError&) {
    throw;
  } catch (const Error& e) {
    throw CorruptFileError(std::string("model container: ") + e.what(), 0);
  }
  m.dropout_rate = parse_number(c.meta_value(prefix + "dropout_rate"), prefix + "dropout_rate");
  const auto h = m.gru.hidden();
  const auto d = m.gru.input_dim();
  const bool ok = m.gru.w_r.rows() == h && m.gru.w_h.rows() == h && m.gru.w_r.cols() == d &&
                  m.gru.w_h.cols() == d && m.gru.u_z.rows() == h && m.gru.u_z.cols() == h &&
                  m.gru.u_r.rows() == h && m.gru.u_r.cols() == h && m.gru.u_h.rows() == h &&
                  m.gru.u_h.cols() == h && m.gru.b_z.size() == h && m.gru.b_r.size() == h &&
                  m.gru.b_h.size() == h && m.w_dense.cols() == h && m.b_dense.size() == m.w_dense.rows() &&
                  m.w_out.cols() == m.w_dense.rows() && m.b_out.size() == m.w_out.rows();
  if (!ok) throw CorruptFileError("model container: inconsistent classifier shapes under '" + prefix + "'", 0);
  return m;
}

void pack(ModelContainer& c, const std::string& prefix, const KpcaModel& m) {
  pack(c, prefix + "std.", m.standardizer);
  c.put(prefix + "x_fit", m.x_fit);
  c.put(prefix + "eigenvalues", m.eigenvalues);
  c.put(prefix + "alphas", m.alphas);
  c.put(prefix + "kernel_col_means", m.kernel_col_means.transpose());
  c.meta[prefix + "kernel_grand_mean"] = number(m.kernel_grand_mean);
  c.meta[prefix + "degree"] = std::to_string(m.kernel.degree);
  c.meta[prefix + "coef0"] = number(m.kernel.coef0);
}

KpcaModel unpack_kpca(const ModelContainer& c, const std::string& prefix) {
  KpcaModel m;
  m.standardizer = unpack_standardizer(c, prefix + "std.");
  m.x_fit = c.tensor(prefix + "x_fit");
  m.eigenvalues = c.tensor(prefix + "eigenvalues").col(0);
  m.alphas = c.tensor(prefix + "alphas");
  m.kernel_col_means = c.tensor(prefix + "kernel_col_means").col(0).transpose();
  m.kernel_grand_mean = parse_number(c.meta_value(prefix + "kernel_grand_mean"), "kernel_grand_mean");
  m.kernel.degree = static_cast<int>(parse_number(c.meta_value(prefix + "degree"), "degree"));
  m.kernel.coef0 = parse_number(c.meta_value(prefix + "coef0"), "coef0");
  if (m.alphas.rows() != m.x_fit.rows() || m.kernel_col_means.size() != m.x_fit.rows() ||
      m.standardizer.dim() != m.x_fit.cols()) {
    throw CorruptFileError("model container: inconsistent KPCA shapes", 0);
  }
  return m;
}

void pack(ModelContainer& c, const std::string& prefix, const AutoencoderModel& m) {
  pack(c, prefix + "std.", m.standardizer);
  AutoencoderParams::zip([&](const char* name, const auto& t) { c.put(prefix + name, t); }, m.params);
  if (!m.loss_history.empty()) {
    c.put(prefix + "loss_history",
          Eigen::Map<const Eigen::VectorXd>(m.loss_history.data(), static_cast<Eigen::Index>(m.loss_history.size())));
  }
}

AutoencoderModel unpack_autoencoder(const ModelContainer& c, const std::string& prefix) {
  AutoencoderModel m;
  m.standardizer = unpack_standardizer(c, prefix + "std.");
  AutoencoderParams::zip(
      [&](const char* name, auto& t) {
        const Eigen::MatrixXd& src = c.tensor(prefix + name);
        if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Eigen::VectorXd>) {
          t = src.col(0);
        } else {
          t = src;
        }
      },
      m.params);
  if (const auto it = c.tensors.find(prefix + "loss_history"); it != c.tensors.end()) {
    m.loss_history.assign(it->second.data(), it->second.data() + it->second.size());
  }
  const auto& p = m.params;
  if (p.w_enc1.cols() != m.standardizer.dim() || p.w_enc2.cols() != p.w_enc1.rows() ||
      p.w_dec1.cols() != p.w_enc2.rows() || p.w_dec2.cols() != p.w_dec1.rows() ||
      p.w_dec2.rows() != p.w_enc1.cols()) {
    throw CorruptFileError("model container: inconsistent autoencoder shapes", 0);
  }
  return m;
}

}  // namespace nsp::datakit
