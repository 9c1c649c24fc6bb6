#include "costlens/fields.hpp"

#include "costlens/image_io.hpp"

#include <bit>
#include <cstring>
#include <limits>

namespace costlens {

namespace {

constexpr char kSpfMagic[4] = {'S', 'P', 'F', '1'};
constexpr std::size_t kSpfHeaderSize = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

SceneBundle make_scene_bundle(std::string id, ProbabilityField probabilities,
                              LabelField ground_truth, std::optional<std::string> image_ref) {
  if (probabilities.height() != ground_truth.rows() ||
      probabilities.width() != ground_truth.cols())
    throw ValidationError("scene '" + id + "': probability field and labels differ in shape");
  return SceneBundle{std::move(id), std::move(probabilities), std::move(ground_truth),
                     std::move(image_ref)};
}

std::vector<std::uint8_t> encode_spf(const SpfTensor& tensor) {
  const std::uint64_t count =
      static_cast<std::uint64_t>(tensor.height) * tensor.width * tensor.channels;
  if (count != tensor.data.size())
    throw ValidationError("SPF tensor value count does not match its shape");
  std::vector<std::uint8_t> out;
  out.reserve(kSpfHeaderSize + count * 4);
  out.insert(out.end(), kSpfMagic, kSpfMagic + 4);
  put_u32(out, tensor.height);
  put_u32(out, tensor.width);
  put_u32(out, tensor.channels);
  for (float f : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

SpfTensor decode_spf(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kSpfHeaderSize || std::memcmp(bytes.data(), kSpfMagic, 4) != 0)
    throw ValidationError("bad magic: not an SPF1 file");
  SpfTensor t;
  t.height = get_u32(bytes.data() + 4);
  t.width = get_u32(bytes.data() + 8);
  t.channels = get_u32(bytes.data() + 12);
  if (t.height == 0 || t.width == 0 || t.channels == 0)
    throw ValidationError("SPF dimensions must be positive");
  const std::uint64_t count = static_cast<std::uint64_t>(t.height) * t.width * t.channels;
  if (count > (std::numeric_limits<std::uint64_t>::max() - kSpfHeaderSize) / 4 ||
      count > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()))
    throw ValidationError("SPF dimension overflow");
  if (bytes.size() != kSpfHeaderSize + count * 4)
    throw ValidationError("SPF payload size does not match header dimensions");
  t.data.resize(count);
  const std::uint8_t* p = bytes.data() + kSpfHeaderSize;
  for (std::uint64_t i = 0; i < count; ++i, p += 4)
    t.data[i] = std::bit_cast<float>(get_u32(p));
  return t;
}

SpfTensor read_spf(const std::filesystem::path& path) {
  try {
    return decode_spf(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_spf(const SpfTensor& tensor, const std::filesystem::path& path) {
  write_file_atomically(path, encode_spf(tensor));
}

ProbabilityField load_probability_field(const std::filesystem::path& path) {
  SpfTensor t = read_spf(path);
  if (t.channels < 2) throw ValidationError(path.string() + ": SPF needs at least 2 classes");
  ProbabilityField::Values values =
      Eigen::Map<const ProbabilityField::Values>(t.data.data(),
                                                 static_cast<Eigen::Index>(t.height) * t.width,
                                                 t.channels);
  try {
    return ProbabilityField::from_values(static_cast<int>(t.height), static_cast<int>(t.width),
                                         std::move(values));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_probability_field(const ProbabilityField& field, const std::filesystem::path& path) {
  SpfTensor t;
  t.height = static_cast<std::uint32_t>(field.height());
  t.width = static_cast<std::uint32_t>(field.width());
  t.channels = static_cast<std::uint32_t>(field.num_classes());
  t.data.assign(field.values().data(), field.values().data() + field.values().size());
  write_spf(t, path);
}

void validate_labels(const LabelField& labels, const ClassCatalog& catalog) {
  const std::uint8_t ignore = catalog.ignore_label();
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const std::uint8_t v = labels.data()[i];
    if (v != ignore && v >= catalog.size())
      throw ValidationError("label value " + std::to_string(v) + " is neither a class (N=" +
                            std::to_string(catalog.size()) + ") nor the ignore label");
  }
}

LabelField load_label_field(const std::filesystem::path& path, const ClassCatalog& catalog) {
  LabelField labels = read_gray8(path);
  try {
    validate_labels(labels, catalog);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return labels;
}

void save_label_field(const LabelField& labels, const std::filesystem::path& path) {
  write_gray8(labels, path);
}

void save_mask(const Mask& mask, const std::filesystem::path& path, int num_classes) {
  if (mask.size() > 0 && mask.maxCoeff() >= num_classes)
    throw ValidationError("mask value exceeds the class count");
  write_gray8(mask, path);
}

Mask load_mask(const std::filesystem::path& path, int num_classes) {
  Mask mask = read_gray8(path);
  if (mask.size() > 0 && mask.maxCoeff() >= num_classes)
    throw ValidationError(path.string() + ": mask value exceeds the class count");
  return mask;
}

}  // namespace costlens
