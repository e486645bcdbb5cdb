#include "wio/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "wio/config.hpp"

namespace wio::io {

namespace {

constexpr char kMagic[8] = {'W', 'I', 'O', 'C', 'K', 'P', 'T', '\0'};

template <typename U>
void put_le(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw Error(ErrorCode::parse_failure, "truncated checkpoint");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const net::Model& model, const Normalizer& norm) {
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  const std::string spec = dump_spec(model.spec);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(spec.size()));
  out.write(spec.data(), static_cast<std::streamsize>(spec.size()));
  for (double m : norm.mean()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(m));
  for (double s : norm.std()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(s));
  ad::write_parameters(out, model.params);
  if (!out) throw Error(ErrorCode::io_failure, "failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + sizeof(magic), kMagic)) {
    throw Error(ErrorCode::parse_failure, "not a checkpoint (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::parse_failure, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto spec_len = get_le<std::uint32_t>(in);
  std::string spec_text(spec_len, '\0');
  if (!in.read(spec_text.data(), spec_len)) throw Error(ErrorCode::parse_failure, "truncated checkpoint");

  Checkpoint ckpt;
  ckpt.model = net::build<float>(parse_spec(spec_text), 0);
  Normalizer::Channels mean{}, std_dev{};
  for (double& m : mean) m = std::bit_cast<double>(get_le<std::uint64_t>(in));
  for (double& s : std_dev) s = std::bit_cast<double>(get_le<std::uint64_t>(in));
  ckpt.normalizer = Normalizer::frozen(mean, std_dev);

  auto params = ad::read_parameters<float>(in);
  if (params.size() != ckpt.model.params.size()) {
    throw Error(ErrorCode::spec_mismatch, "checkpoint parameter count differs from its model spec");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& expected = ckpt.model.params[i];
    if (params[i].name != expected.name || params[i].value.shape() != expected.value.shape()) {
      throw Error(ErrorCode::spec_mismatch, "checkpoint parameter '" + params[i].name + "' does not match its spec");
    }
  }
  ckpt.model.params = std::move(params);
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const net::Model& model, const Normalizer& norm) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  write_checkpoint(out, model, norm);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  return read_checkpoint(in);
}

void require_spec(const Checkpoint& ckpt, const net::ModelSpec& expected, std::string_view what) {
  if (!(ckpt.model.spec == expected)) {
    throw Error(ErrorCode::spec_mismatch, std::string(what) + " checkpoint was built for a different model spec (" +
                                              dump_spec(ckpt.model.spec) + " vs " + dump_spec(expected) + ")");
  }
}

}  // namespace wio::io
