#include "costlens/image_io.hpp"

#include "costlens/error.hpp"

#include <png.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <thread>

namespace costlens {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct PngWriteState {
  Bytes* out;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* state = static_cast<PngWriteState*>(png_get_io_ptr(png));
  state->out->insert(state->out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

thread_local std::string png_last_error;

void png_error_capture(png_structp png, png_const_charp msg) {
  png_last_error = msg ? msg : "unknown error";
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

Bytes encode_png_rows(int width, int height, int color_type, int channels,
                      const std::uint8_t* data) {
  if (width <= 0 || height <= 0) throw ValidationError("cannot encode an empty image");
  Bytes out;
  PngWriteState state{&out};
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_capture, png_warning_ignore);
  if (!png) throw IoError("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: " + png_last_error);
  }
  png_set_write_fn(png, &state, png_write_to_vector, png_flush_noop);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int r = 0; r < height; ++r) png_write_row(png, data + r * stride);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

struct PngReadState {
  const Bytes* in;
  std::size_t offset;
};

void png_read_from_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->offset + length > state->in->size()) png_error(png, "truncated data");
  std::memcpy(data, state->in->data() + state->offset, length);
  state->offset += length;
}

LabelImage decode_png_gray8(const Bytes& bytes) {
  PngReadState state{&bytes, 0};
  // Heap-held so nothing automatic is modified between setjmp and longjmp.
  auto image = std::make_unique<LabelImage>();
  auto bad_format = std::make_unique<bool>(false);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_capture, png_warning_ignore);
  if (!png) throw IoError("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("png: " + png_last_error);
  }
  png_set_read_fn(png, &state, png_read_from_vector);
  png_read_info(png, info);
  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(png, info) != 8) {
    *bad_format = true;
  } else {
    image->resize(height, width);
    for (png_uint_32 r = 0; r < height; ++r)
      png_read_row(png, image->data() + static_cast<std::size_t>(r) * width, nullptr);
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (*bad_format) throw ValidationError("expected an 8-bit single-channel PNG");
  return std::move(*image);
}

// Reads the next whitespace-delimited token of a netpbm header, skipping
// comments.
std::string pnm_token(const Bytes& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) token.push_back(static_cast<char>(bytes[pos++]));
  return token;
}

LabelImage decode_pgm(const Bytes& bytes) {
  std::size_t pos = 2;
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(pnm_token(bytes, pos));
    height = std::stoi(pnm_token(bytes, pos));
    maxval = std::stoi(pnm_token(bytes, pos));
  } catch (const std::exception&) {
    throw ValidationError("malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
    throw ValidationError("unsupported PGM dimensions or maxval");
  ++pos;  // single whitespace before the raster
  const std::size_t needed = static_cast<std::size_t>(width) * height;
  if (pos + needed > bytes.size()) throw ValidationError("truncated PGM raster");
  LabelImage image(height, width);
  std::memcpy(image.data(), bytes.data() + pos, needed);
  return image;
}

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

void write_file_atomically(const std::filesystem::path& path, const Bytes& bytes) {
  static std::atomic<unsigned long> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000) +
         "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failure on '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

Bytes encode_png(const LabelImage& image) {
  return encode_png_rows(static_cast<int>(image.cols()), static_cast<int>(image.rows()),
                         PNG_COLOR_TYPE_GRAY, 1, image.data());
}

Bytes encode_png(const RgbImage& image) {
  return encode_png_rows(image.width, image.height, PNG_COLOR_TYPE_RGB, 3,
                         image.pixels.data());
}

Bytes encode_pgm(const LabelImage& image) {
  const std::string header = "P5\n" + std::to_string(image.cols()) + " " +
                             std::to_string(image.rows()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), image.data(), image.data() + image.size());
  return out;
}

Bytes encode_ppm(const RgbImage& image) {
  const std::string header = "P6\n" + std::to_string(image.width) + " " +
                             std::to_string(image.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

LabelImage decode_gray8(const Bytes& bytes) {
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin()))
    return decode_png_gray8(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  throw ValidationError("unrecognized image format (expected PNG or binary PGM)");
}

LabelImage read_gray8(const std::filesystem::path& path) {
  try {
    return decode_gray8(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_gray8(const LabelImage& image, const std::filesystem::path& path) {
  write_file_atomically(path, lower_extension(path) == ".pgm" ? encode_pgm(image)
                                                              : encode_png(image));
}

void write_rgb(const RgbImage& image, const std::filesystem::path& path) {
  write_file_atomically(path, lower_extension(path) == ".ppm" ? encode_ppm(image)
                                                              : encode_png(image));
}

}  // namespace costlens
