#include <fairprompt/io.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fairprompt::io {

namespace {
constexpr char kMagic[] = "fairprompt-checkpoint v1";
}

const Matrix& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return m;
  throw IoError("checkpoint: missing tensor '" + name + "'");
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return true;
  return false;
}

std::string Checkpoint::meta_value(const std::string& key, const std::string& fallback) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return fallback;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write checkpoint: " + path);
  f << kMagic << "\n";
  f << "kind " << ckpt.kind << "\n";
  f << "tag " << ckpt.tag << "\n";
  for (const auto& [k, v] : ckpt.meta) f << "meta " << k << " " << v << "\n";
  f << "tensors " << ckpt.tensors.size() << "\n";
  for (const auto& [name, m] : ckpt.tensors)
    f << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
  f << "data\n";
  for (const auto& [name, m] : ckpt.tensors)
    f.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
  if (!f) throw IoError("failed writing checkpoint payload: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(f, line) || line != kMagic)
    throw IoError("not a fairprompt checkpoint: " + path);
  Checkpoint ckpt;
  std::vector<std::tuple<std::string, Index, Index>> shapes;
  std::size_t expected = 0;
  while (std::getline(f, line)) {
    std::istringstream is(line);
    std::string key;
    is >> key;
    if (key == "kind") {
      is >> ckpt.kind;
    } else if (key == "tag") {
      is >> ckpt.tag;
    } else if (key == "meta") {
      std::string k, v;
      is >> k >> v;
      ckpt.meta.emplace_back(k, v);
    } else if (key == "tensors") {
      is >> expected;
    } else if (key == "tensor") {
      std::string name;
      Index r = 0, c = 0;
      is >> name >> r >> c;
      shapes.emplace_back(name, r, c);
    } else if (key == "data") {
      break;
    } else {
      throw IoError("checkpoint header: unknown line '" + line + "' in " + path);
    }
  }
  if (shapes.size() != expected)
    throw IoError("checkpoint header: tensor count mismatch in " + path);
  for (const auto& [name, r, c] : shapes) {
    Matrix m(r, c);
    f.read(reinterpret_cast<char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(m.size())));
    if (!f) throw IoError("checkpoint payload truncated: " + path);
    ckpt.tensors.emplace_back(name, std::move(m));
  }
  return ckpt;
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file for hashing: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof(buf));
    const auto got = f.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

void append_csv_row(const std::string& path, const std::string& header, const std::string& row) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream f(path, std::ios::app);
  if (!f) throw IoError("cannot append to " + path);
  if (fresh) f << header << "\n";
  f << row << "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace fairprompt::io
