#include "latentopt/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include <png.h>

#include "latentopt/errors.hpp"

namespace latentopt {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// Next whitespace-separated PPM header token, skipping '#' comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok += ch;
  }
  return tok;
}

int ppm_int(std::istream& in, const fs::path& path, int min_value, const char* what) {
  const std::string tok = ppm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < min_value) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(std::string("malformed PPM ") + what + " in " + path.string());
  }
}

ImageTensor read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open image " + path.string());
  const std::string magic = ppm_token(in);
  if (magic != "P6" && magic != "P3") throw InvalidArgument(path.string() + " is not a P3/P6 PPM");
  const int width = ppm_int(in, path, 1, "header");
  const int height = ppm_int(in, path, 1, "header");
  const int maxval = ppm_int(in, path, 1, "header");
  if (maxval > 65535) throw InvalidArgument("PPM maxval out of range in " + path.string());
  ImageTensor img{{height, width, 3}, std::vector<double>(static_cast<std::size_t>(width) * height * 3)};
  if (magic == "P3") {
    for (double& v : img.data) {
      v = static_cast<double>(ppm_int(in, path, 0, "pixel data")) / maxval;
    }
  } else {
    const int bytes_per = maxval < 256 ? 1 : 2;
    std::string buf(img.data.size() * bytes_per, '\0');
    if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size())))
      throw InvalidArgument("PPM pixel data truncated in " + path.string());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      const unsigned raw = bytes_per == 1 ? static_cast<unsigned char>(buf[i])
                                          : (static_cast<unsigned char>(buf[2 * i]) << 8) |
                                                static_cast<unsigned char>(buf[2 * i + 1]);
      img.data[i] = static_cast<double>(raw) / maxval;
    }
  }
  for (double& v : img.data) v = std::min(v, 1.0);
  return img;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

ImageTensor read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw InvalidArgument("cannot read PNG " + path.string() + ": " + image.message);
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int channels = gray ? 1 : 3;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw InvalidArgument("cannot decode PNG " + path.string() + ": " + image.message);
  }
  ImageTensor img{{static_cast<int>(image.height), static_cast<int>(image.width), channels},
                  std::vector<double>(buffer.size())};
  for (std::size_t i = 0; i < buffer.size(); ++i) img.data[i] = buffer[i] / 255.0;
  return img;
}

}  // namespace

ImageTensor read_image(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidArgument("image not found: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".ppm" || ext == ".pnm") return read_ppm(path);
  if (ext == ".png") return read_png(path);
  throw InvalidArgument("unsupported image format '" + ext + "' (use .png or .ppm)");
}

void write_ppm(const fs::path& path, const ImageTensor& image) {
  if (image.shape.channels != 3) throw InvalidArgument("PPM output needs 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "P6\n" << image.shape.width << " " << image.shape.height << "\n255\n";
  std::string bytes(image.data.size(), '\0');
  std::transform(image.data.begin(), image.data.end(), bytes.begin(),
                 [](double v) { return static_cast<char>(to_byte(v)); });
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_png(const fs::path& path, const ImageTensor& image, const std::string& comment) {
  if (image.shape.channels != 1 && image.shape.channels != 3) throw InvalidArgument("PNG output needs 1 or 3 channels");
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw InvalidArgument("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.shape.width, image.shape.height, 8,
               image.shape.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::string key = "Comment";
  std::string text = comment;
  png_text chunk{};
  if (!comment.empty()) {
    chunk.compression = PNG_TEXT_COMPRESSION_NONE;
    chunk.key = key.data();
    chunk.text = text.data();
    png_set_text(png, info, &chunk, 1);
  }
  png_write_info(png, info);
  const std::size_t row_bytes = static_cast<std::size_t>(image.shape.width) * image.shape.channels;
  std::vector<png_byte> row(row_bytes);
  for (int y = 0; y < image.shape.height; ++y) {
    for (std::size_t i = 0; i < row_bytes; ++i) row[i] = to_byte(image.data[y * row_bytes + i]);
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_image(const fs::path& path, const ImageTensor& image, const std::string& comment) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, image, comment);
  if (ext == ".ppm") return write_ppm(path, image);
  throw InvalidArgument("unsupported image format '" + ext + "'");
}

void write_f32_dump(const fs::path& path, const std::vector<double>& values, const std::vector<int>& shape,
                    const nlohmann::json& extra) {
  std::size_t count = 1;
  for (int d : shape) count *= static_cast<std::size_t>(d);
  if (count != values.size()) throw InvalidArgument("write_f32_dump: shape does not match value count");
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = static_cast<float>(values[i]);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>((u >> (8 * b)) & 0xFF);
  }
  write_text(path, bytes);
  nlohmann::json sidecar = extra;
  sidecar["shape"] = shape;
  sidecar["dtype"] = "f32";
  write_text(fs::path(path.string() + ".json"), sidecar.dump(2) + "\n");
}

F32Dump read_f32_dump(const fs::path& path) {
  const fs::path sidecar_path = path.string() + ".json";
  if (!fs::exists(path) || !fs::exists(sidecar_path))
    throw InvalidArgument("latent dump " + path.string() + " or its .json sidecar is missing");
  F32Dump dump;
  try {
    dump.sidecar = nlohmann::json::parse(read_text(sidecar_path));
    dump.shape = dump.sidecar.at("shape").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("malformed sidecar " + sidecar_path.string() + ": " + e.what());
  }
  if (dump.sidecar.value("dtype", "") != "f32") throw InvalidArgument("sidecar dtype must be f32");
  const std::string bytes = read_text(path);
  std::size_t count = 1;
  for (int d : dump.shape) count *= static_cast<std::size_t>(d);
  if (bytes.size() != 4 * count) throw InvalidArgument("latent dump " + path.string() + " size does not match its shape");
  dump.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    float f;
    std::memcpy(&f, &u, 4);
    dump.values[i] = f;
  }
  return dump;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace latentopt
