#include "pmffnn/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "pmffnn/errors.hpp"

namespace pmffnn {

namespace {

constexpr char kMagic[8] = {'P', 'M', 'F', 'F', 'N', 'N', '0', '1'};

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_f64(std::ofstream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  write_u64(out, bits);
}

double read_f64(std::ifstream& in) {
  const std::uint64_t bits = read_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

std::vector<ParamRef> all_tensors(ModelGraph& model) {
  std::vector<ParamRef> tensors = model.trainable_params();
  for (auto& b : model.buffers()) tensors.push_back(b);
  return tensors;
}

}  // namespace

void save_model_params(const std::string& path, ModelGraph& model) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + tmp);
    out.write(kMagic, sizeof(kMagic));
    const auto tensors = all_tensors(model);
    write_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
      write_u32(out, static_cast<std::uint32_t>(t.name.size()));
      out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
      write_u64(out, t.value->rows());
      write_u64(out, t.value->cols());
      for (double v : t.value->flat()) write_f64(out, v);
    }
    if (!out) throw ParseError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw ParseError("cannot move " + tmp + " into place at " + path);
  }
}

void load_model_params(const std::string& path, ModelGraph& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("not a model parameter file: " + path);
  }
  const auto tensors = all_tensors(model);
  const std::uint32_t count = read_u32(in);
  if (count != tensors.size()) {
    throw ParseError("model file holds " + std::to_string(count) + " tensors, model expects " +
                     std::to_string(tensors.size()));
  }
  for (const auto& t : tensors) {
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const std::uint64_t rows = read_u64(in);
    const std::uint64_t cols = read_u64(in);
    if (!in) throw ParseError("truncated model file: " + path);
    if (name != t.name || rows != t.value->rows() || cols != t.value->cols()) {
      throw ParseError("tensor mismatch: file has " + name + " [" + std::to_string(rows) + "x" +
                       std::to_string(cols) + "], model expects " + t.name + " [" +
                       t.value->shape_str() + "]");
    }
    for (double& v : t.value->flat()) v = read_f64(in);
    if (!in) throw ParseError("truncated model file: " + path);
  }
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string dataset_fingerprint(const DatasetTable& table) {
  std::uint64_t h = fnv1a64(table.features.data(), table.features.size() * sizeof(double));
  if (table.task == Task::Classification) {
    if (!table.labels.empty()) {
      const std::uint64_t h2 = fnv1a64(table.labels.data(), table.labels.size() * sizeof(int));
      h = fnv1a64(&h2, sizeof(h2)) ^ h;
    }
  } else if (table.targets.size() > 0) {
    const std::uint64_t h2 = fnv1a64(table.targets.data(), table.targets.size() * sizeof(double));
    h = fnv1a64(&h2, sizeof(h2)) ^ h;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%zu:%zu:0x%016llx", table.n_rows(),
                static_cast<std::size_t>(table.features.cols()),
                static_cast<unsigned long long>(h));
  return buf;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ParseError("cannot open file for writing: " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ParseError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw ParseError("cannot move " + tmp + " into place at " + path);
  }
}

}  // namespace pmffnn
