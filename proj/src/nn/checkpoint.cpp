#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "common/errors.hpp"
#include "nn/model.hpp"

namespace pglake::nn {

// Container layout (little-endian throughout):
//   magic "PGLCKP01"
//   u32 entry count
//   per entry: u32 name length, name bytes, u64 rows, u64 cols,
//              rows*cols IEEE-754 doubles (raw bits)
// Keys: meta.variant (1x1 code), lstm.* or ann.* weights, norm.*.

namespace {

constexpr char kMagic[8] = {'P', 'G', 'L', 'C', 'K', 'P', '0', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_entry(std::ostream& os, const std::string& name, const ad::Tensor& t) {
  write_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u64(os, t.rows());
  write_u64(os, t.cols());
  for (double v : t.data()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
  }
}

std::map<std::string, ad::Tensor> read_all(std::istream& is, const std::string& path) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("'" + path + "' is not a pglake checkpoint");
  const std::uint32_t count = read_u32(is);
  std::map<std::string, ad::Tensor> entries;
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint32_t len = read_u32(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    const std::uint64_t rows = read_u64(is);
    const std::uint64_t cols = read_u64(is);
    if (!is || rows == 0 || cols == 0 || rows * cols > (1ull << 32))
      throw IoError("corrupt checkpoint entry '" + name + "' in '" + path + "'");
    std::vector<double> data(rows * cols);
    for (auto& v : data) {
      const std::uint64_t bits = read_u64(is);
      std::memcpy(&v, &bits, 8);
    }
    if (!is) throw IoError("truncated checkpoint '" + path + "'");
    entries.emplace(std::move(name), ad::Tensor(rows, cols, std::move(data)));
  }
  return entries;
}

const ad::Tensor& take(const std::map<std::string, ad::Tensor>& entries, const std::string& key,
                       const std::string& path) {
  auto it = entries.find(key);
  if (it == entries.end())
    throw IoError("checkpoint '" + path + "' is missing entry '" + key + "'");
  return it->second;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");

  Model& m = const_cast<Model&>(model);
  std::vector<std::pair<std::string, ad::Tensor*>> entries =
      model.variant == Variant::kAnn ? m.ann.named_tensors() : m.lstm.named_tensors();
  std::vector<std::pair<std::string, ad::Tensor>> all;
  all.emplace_back("meta.variant",
                   ad::Tensor::scalar(static_cast<double>(static_cast<int>(model.variant))));
  for (auto& [name, t] : entries) all.emplace_back(name, *t);
  all.emplace_back("norm.x_mean", model.norm.x_mean);
  all.emplace_back("norm.x_std", model.norm.x_std);
  all.emplace_back("norm.y_mean", model.norm.y_mean);
  all.emplace_back("norm.y_std", model.norm.y_std);

  os.write(kMagic, 8);
  write_u32(os, static_cast<std::uint32_t>(all.size()));
  for (const auto& [name, t] : all) write_entry(os, name, t);
  if (!os) throw IoError("failed writing checkpoint '" + path + "'");
}

Model load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint '" + path + "'");
  const auto entries = read_all(is, path);

  Model model;
  const int code = static_cast<int>(take(entries, "meta.variant", path).item());
  if (code < 0 || code > 4) throw IoError("checkpoint '" + path + "' has unknown variant code");
  model.variant = static_cast<Variant>(code);

  if (model.variant == Variant::kAnn) {
    for (auto& [name, t] : model.ann.named_tensors()) *t = take(entries, name, path);
    model.ann.validate();
  } else {
    for (auto& [name, t] : model.lstm.named_tensors()) *t = take(entries, name, path);
    model.lstm.validate();
  }
  model.norm.x_mean = take(entries, "norm.x_mean", path);
  model.norm.x_std = take(entries, "norm.x_std", path);
  model.norm.y_mean = take(entries, "norm.y_mean", path);
  model.norm.y_std = take(entries, "norm.y_std", path);
  return model;
}

}  // namespace pglake::nn
