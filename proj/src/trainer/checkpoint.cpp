#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "risa/core/error.hpp"
#include "risa/trainer/config_json.hpp"
#include "risa/trainer/trainer.hpp"

// Container layout (little-endian):
//   "RISACKPT" | u32 version | u64 header length | JSON header
//   | u32 tensor count | { u32 name length | name | u32 rank | u64 dims... | f64 values... }
//   | u64 FNV-1a of every preceding byte
namespace risa {

namespace {

constexpr char kMagic[8] = {'R', 'I', 'S', 'A', 'C', 'K', 'P', 'T'};
const std::string kFirstMoment = "optim.m/";
const std::string kSecondMoment = "optim.v/";

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

class Writer {
 public:
  template <class T>
  void put(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buffer_.append(raw, sizeof(T));
  }
  void bytes(std::string_view s) { buffer_.append(s); }
  void tensor(const std::string& name, const Tensor& t) {
    put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    bytes(name);
    put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put<std::uint64_t>(d);
    buffer_.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
  }
  const std::string& buffer() const { return buffer_; }

 private:
  std::string buffer_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::pair<std::string, Tensor> tensor() {
    const auto name_len = get<std::uint32_t>();
    std::string name(take(name_len));
    const auto rank = get<std::uint32_t>();
    if (rank > 8) fail(ErrorKind::Decode, "checkpoint tensor '" + name + "' has rank " + std::to_string(rank));
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(get<std::uint64_t>());
      if (d != 0 && count > (bytes_.size() / sizeof(double)) / d) {
        fail(ErrorKind::Decode, "checkpoint tensor '" + name + "' is larger than the file");
      }
      count *= d;
    }
    const auto raw = take(count * sizeof(double));
    std::vector<double> values(count);
    std::memcpy(values.data(), raw.data(), raw.size());
    return {std::move(name), Tensor(std::move(shape), std::move(values))};
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (n > bytes_.size() - pos_) fail(ErrorKind::Decode, "checkpoint is truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  using namespace config_json;
  nlohmann::ordered_json header;
  header["format"] = "risa-checkpoint";
  header["encoder"] = to_json(ckpt.encoder_config);
  header["bank"] = to_json(ckpt.bank_config);
  header["train"] = to_json(ckpt.train_config);
  header["loss"] = to_json(ckpt.loss_weights);
  header["augmentation"] = to_json(ckpt.augmentation);
  header["image_side"] = ckpt.image_side;
  header["epoch"] = ckpt.epoch;
  if (ckpt.optimizer) header["optimizer_step"] = ckpt.optimizer->step;
  const std::string header_text = header.dump();

  std::vector<std::pair<std::string, const Tensor*>> tensors;
  ckpt.model.visit(ConstParameterVisitor(
      [&](const std::string& name, const Tensor& t) { tensors.emplace_back(name, &t); }));
  const std::size_t n_params = tensors.size();
  if (ckpt.optimizer) {
    const auto& opt = *ckpt.optimizer;
    if (opt.first_moment.size() != n_params || opt.second_moment.size() != n_params) {
      fail(ErrorKind::Integrity, "optimizer state does not match the model");
    }
    for (std::size_t i = 0; i < n_params; ++i) {
      tensors.emplace_back(kFirstMoment + tensors[i].first, &opt.first_moment[i]);
    }
    for (std::size_t i = 0; i < n_params; ++i) {
      tensors.emplace_back(kSecondMoment + tensors[i].first, &opt.second_moment[i]);
    }
  }

  Writer w;
  w.bytes(std::string_view(kMagic, sizeof(kMagic)));
  w.put<std::uint32_t>(Checkpoint::kFormatVersion);
  w.put<std::uint64_t>(header_text.size());
  w.bytes(header_text);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) w.tensor(name, *t);
  const std::uint64_t checksum = fnv1a(w.buffer());
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write checkpoint " + path.string());
  write_checkpoint(ckpt, out);
  if (!out) fail(ErrorKind::Io, "failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(std::istream& in) {
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t kFixed = sizeof(kMagic) + sizeof(std::uint32_t);
  if (bytes.size() < kFixed || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorKind::Decode, "not a checkpoint file");
  }
  Reader r(bytes);
  r.take(sizeof(kMagic));
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kFormatVersion) {
    fail(ErrorKind::IncompatibleVersion, "checkpoint format version " + std::to_string(version) +
                                             ", this build reads version " +
                                             std::to_string(Checkpoint::kFormatVersion));
  }
  if (bytes.size() < kFixed + sizeof(std::uint64_t)) fail(ErrorKind::Decode, "checkpoint is truncated");
  const std::string_view body(bytes.data(), bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof(stored));
  if (fnv1a(body) != stored) fail(ErrorKind::Decode, "checkpoint checksum mismatch (corrupted file)");

  Reader payload(body);
  payload.take(kFixed);
  const auto header_len = payload.get<std::uint64_t>();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(payload.take(header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Decode, std::string("checkpoint header: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    using namespace config_json;
    ckpt.encoder_config = read(header.at("encoder"), "encoder", EncoderConfig{});
    ckpt.bank_config = read(header.at("bank"), "bank", BankConfig{});
    ckpt.train_config = read(header.at("train"), "train", TrainConfig{});
    ckpt.loss_weights = read(header.at("loss"), "loss", LossWeights{});
    ckpt.augmentation = read(header.at("augmentation"), "augmentation", AugmentationSpec{});
    ckpt.image_side = header.at("image_side").get<std::size_t>();
    ckpt.epoch = header.at("epoch").get<std::size_t>();
    ckpt.model = make_model(ckpt.encoder_config, ckpt.bank_config);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Decode, std::string("checkpoint header: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::Decode, std::string("checkpoint header: ") + e.what());
  }
  std::map<std::string, Tensor> stored_tensors;
  const auto count = payload.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto [name, tensor] = payload.tensor();
    stored_tensors.emplace(std::move(name), std::move(tensor));
  }
  if (payload.position() != body.size()) fail(ErrorKind::Decode, "trailing bytes in checkpoint");

  auto fetch = [&](const std::string& name, const Tensor& like) -> Tensor {
    const auto it = stored_tensors.find(name);
    if (it == stored_tensors.end()) fail(ErrorKind::Decode, "checkpoint lacks tensor '" + name + "'");
    if (!it->second.same_shape(like)) {
      fail(ErrorKind::Decode, "tensor '" + name + "' has shape " + shape_string(it->second.shape()) +
                                  ", model expects " + shape_string(like.shape()));
    }
    return it->second;
  };

  std::vector<std::string> names;
  ckpt.model.visit(ParameterVisitor([&](const std::string& name, Tensor& t) {
    t = fetch(name, t);
    names.push_back(name);
  }));

  const bool has_optimizer = header.contains("optimizer_step");
  if (has_optimizer) {
    OptimizerState state;
    state.step = header.at("optimizer_step").get<std::uint64_t>();
    std::as_const(ckpt.model).visit(ConstParameterVisitor([&](const std::string& name, const Tensor& t) {
      state.first_moment.push_back(fetch(kFirstMoment + name, t));
      state.second_moment.push_back(fetch(kSecondMoment + name, t));
    }));
    ckpt.optimizer = std::move(state);
  }
  const std::size_t expected = names.size() * (has_optimizer ? 3 : 1);
  if (stored_tensors.size() != expected) {
    fail(ErrorKind::Decode, "checkpoint holds " + std::to_string(stored_tensors.size()) +
                                " tensors, expected " + std::to_string(expected));
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace risa
