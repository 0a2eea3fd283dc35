// SPDX-License-Identifier: Apache-2.0
#include "nre/train/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "nre/core/error.hpp"

namespace nre::train {

namespace {

constexpr std::array<char, 8> kMagic = {'N', 'R', 'E', 'C', 'K', 'P', 'T', '1'};
constexpr std::size_t kHeaderBytes = 8 + 4 + 8;

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename U>
U get_le(const std::string& in, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return v;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << v;
  return s.str();
}

nlohmann::json describe_network(const Network<float>& net) {
  auto layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    layers.push_back({{"kind", std::string(to_string(l.kind()))}, {"in", l.in_dim()}, {"out", l.out_dim()}});
  }
  return layers;
}

void add_network(CheckpointFile& file, const std::string& name, const Network<float>& net) {
  file.metadata["networks"][name] = describe_network(net);
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& l = net.layers()[i];
    if (!l.has_parameters()) continue;
    file.tensors.emplace_back(name + "." + std::to_string(i) + ".weight", l.weight());
    file.tensors.emplace_back(name + "." + std::to_string(i) + ".bias", l.bias());
  }
}

Network<float> restore_network(const CheckpointFile& file, const std::string& name) {
  std::vector<Layer<float>> layers;
  try {
    for (const auto& spec : file.metadata.at("networks").at(name)) {
      const auto kind = parse_layer_kind(spec.at("kind").get<std::string>());
      const auto in = spec.at("in").get<std::size_t>();
      const auto out = spec.at("out").get<std::size_t>();
      if (kind == LayerKind::affine) {
        auto layer = Layer<float>::affine(in, out);
        const auto prefix = name + "." + std::to_string(layers.size());
        layer.weight() = file.tensor(prefix + ".weight");
        layer.bias() = file.tensor(prefix + ".bias");
        if (layer.weight().shape() != Shape{out, in} || layer.bias().shape() != Shape{out}) {
          throw DataError("tensor shapes of " + prefix + " do not match its layer");
        }
        layers.push_back(std::move(layer));
      } else {
        layers.push_back(Layer<float>::activation(kind, in));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad network description '" + name + "': " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  return Network<float>(std::move(layers));
}

void check_fingerprint(const CheckpointFile& file, const Network<float>& net) {
  const auto stored = file.metadata.value("encoder_fingerprint", std::string{});
  if (stored != hex64(net.fingerprint())) {
    throw DataError("fingerprint mismatch: checkpoint records " + stored + ", parameters hash to " +
                    hex64(net.fingerprint()));
  }
}

std::string require_kind(const CheckpointFile& file, const std::string& expected) {
  const auto kind = file.metadata.value("kind", std::string{});
  if (kind != expected) throw DataError("expected a '" + expected + "' checkpoint, found '" + kind + "'");
  return kind;
}

}  // namespace

const Tensor<float>& CheckpointFile::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw DataError("checkpoint has no tensor '" + name + "'");
}

void write_checkpoint_file(const std::filesystem::path& path, const CheckpointFile& file) {
  auto meta = file.metadata;
  auto entries = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : file.tensors) {
    const std::uint64_t bytes = t.size() * sizeof(float);
    entries.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}, {"bytes", bytes}});
    offset += bytes;
  }
  meta["tensors"] = entries;
  const auto text = meta.dump();

  std::string blob(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(blob, kCheckpointVersion);
  put_le<std::uint64_t>(blob, text.size());
  blob += text;
  for (const auto& [name, t] : file.tensors) {
    for (float v : t.values()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      put_le<std::uint32_t>(blob, bits);
    }
  }

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointFile read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string blob{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (blob.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), blob.begin())) {
    throw DataError("bad magic in " + path.string());
  }
  if (blob.size() < kHeaderBytes) throw DataError("truncated payload in " + path.string());
  const auto version = get_le<std::uint32_t>(blob, 8);
  if (version != kCheckpointVersion) {
    throw DataError("version mismatch in " + path.string() + ": " + std::to_string(version) + " (supported " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  const auto meta_len = get_le<std::uint64_t>(blob, 12);
  if (blob.size() - kHeaderBytes < meta_len) throw DataError("truncated payload in " + path.string());

  CheckpointFile file;
  try {
    file.metadata = nlohmann::json::parse(blob.begin() + kHeaderBytes,
                                          blob.begin() + static_cast<std::ptrdiff_t>(kHeaderBytes + meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt checkpoint metadata in " + path.string() + ": " + e.what());
  }
  const std::size_t payload = kHeaderBytes + meta_len;
  try {
    for (const auto& entry : file.metadata.at("tensors")) {
      const auto shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto count = shape_size(shape);
      if (entry.at("bytes").get<std::uint64_t>() != count * sizeof(float)) {
        throw DataError("tensor byte count disagrees with its shape");
      }
      if (blob.size() < payload + offset + count * sizeof(float)) {
        throw DataError("truncated payload in " + path.string());
      }
      std::vector<float> values(count);
      for (std::size_t i = 0; i < count; ++i) {
        const auto bits = get_le<std::uint32_t>(blob, payload + offset + i * sizeof(float));
        std::memcpy(&values[i], &bits, sizeof(float));
      }
      file.tensors.emplace_back(entry.at("name").get<std::string>(), Tensor<float>(shape, std::move(values)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt tensor table in " + path.string() + ": " + e.what());
  } catch (const ShapeError& e) {
    throw DataError(std::string("corrupt tensor in checkpoint: ") + e.what());
  }
  file.metadata.erase("tensors");
  return file;
}

void save_checkpoint(const NREModel& model, const std::filesystem::path& path) {
  CheckpointFile file;
  file.metadata["format"] = "nre-checkpoint";
  file.metadata["kind"] = "nre";
  file.metadata["config"] = model.config.to_json();
  file.metadata["weights"] = {model.weights.self(), model.weights.near(), model.weights.far()};
  file.metadata["seed"] = model.config.seed;
  file.metadata["encoder_fingerprint"] = hex64(model.similarity.fingerprint());
  add_network(file, "encoder", model.ae.encoder);
  add_network(file, "decoder", model.ae.decoder);
  add_network(file, "similarity", model.similarity);
  write_checkpoint_file(path, file);
}

NREModel load_checkpoint(const std::filesystem::path& path) {
  const auto file = read_checkpoint_file(path);
  require_kind(file, "nre");
  NREModel model;
  model.ae.encoder = restore_network(file, "encoder");
  model.ae.decoder = restore_network(file, "decoder");
  model.similarity = restore_network(file, "similarity");
  model.similarity.freeze();
  check_fingerprint(file, model.similarity);
  model.config = TrainConfig::from_json(file.metadata.at("config"));
  try {
    const auto& w = file.metadata.at("weights");
    model.weights = LossWeights(w.at(0).get<double>(), w.at(1).get<double>(), w.at(2).get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad loss weights in checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  return model;
}

void save_autoencoder(const Autoencoder<float>& ae, const PretrainConfig& cfg, const std::filesystem::path& path) {
  CheckpointFile file;
  file.metadata["format"] = "nre-checkpoint";
  file.metadata["kind"] = "autoencoder";
  file.metadata["config"] = {{"architecture", cfg.architecture.encoder_dims},
                             {"epochs", cfg.epochs},
                             {"learning_rate", cfg.learning_rate},
                             {"batch_size", cfg.batch_size},
                             {"seed", cfg.seed}};
  file.metadata["seed"] = cfg.seed;
  file.metadata["encoder_fingerprint"] = hex64(ae.encoder.fingerprint());
  add_network(file, "encoder", ae.encoder);
  add_network(file, "decoder", ae.decoder);
  write_checkpoint_file(path, file);
}

Autoencoder<float> load_autoencoder(const std::filesystem::path& path, PretrainConfig* cfg) {
  const auto file = read_checkpoint_file(path);
  require_kind(file, "autoencoder");
  Autoencoder<float> ae{restore_network(file, "encoder"), restore_network(file, "decoder")};
  check_fingerprint(file, ae.encoder);
  if (cfg) {
    try {
      const auto& c = file.metadata.at("config");
      cfg->architecture.encoder_dims = c.at("architecture").get<std::vector<std::size_t>>();
      cfg->epochs = c.at("epochs").get<std::size_t>();
      cfg->learning_rate = c.at("learning_rate").get<double>();
      cfg->batch_size = c.at("batch_size").get<std::size_t>();
      cfg->seed = c.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("bad pretrain config in checkpoint: ") + e.what());
    }
  }
  return ae;
}

std::string checkpoint_kind(const std::filesystem::path& path) {
  return read_checkpoint_file(path).metadata.value("kind", std::string{});
}

}  // namespace nre::train
