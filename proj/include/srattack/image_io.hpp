#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>
#include <jerror.h>

#include "srattack/error.hpp"
#include "srattack/file_util.hpp"
#include "srattack/image.hpp"

namespace srattack {

namespace detail {

struct PngReadSource {
  const unsigned char* data;
  std::size_t size;
  std::size_t offset;
};

struct PngErrorState {
  std::jmp_buf jump;
  char message[256];
};

extern "C" inline void png_error_longjmp(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  std::longjmp(state->jump, 1);
}

extern "C" inline void png_warning_ignore(png_structp, png_const_charp) {}

extern "C" inline void png_read_from_memory(png_structp png, png_bytep out,
                                            png_size_t count) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->offset + count > src->size) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(out, src->data + src->offset, count);
  src->offset += count;
}

// Decodes into `pixels` as 8-bit RGB. Returns an empty string on success,
// otherwise the libpng error message. No C++ objects with destructors live in
// this frame between setjmp and a possible longjmp.
inline std::string decode_png_rgb(const std::vector<unsigned char>& bytes,
                                  std::vector<unsigned char>& pixels, int& width,
                                  int& height) {
  PngErrorState state{};
  PngReadSource src{bytes.data(), bytes.size(), 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state,
                                           png_error_longjmp, png_warning_ignore);
  if (png == nullptr) return "png_create_read_struct failed";
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return "png_create_info_struct failed";
  }
  if (setjmp(state.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return state.message[0] != '\0' ? state.message : "corrupt PNG";
  }
  png_set_read_fn(png, &src, png_read_from_memory);
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_packing(png);
  png_set_expand(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (channels != 3 || rowbytes != static_cast<std::size_t>(w) * 3) {
    png_error(png, "PNG does not decode to 3 channels");
  }
  pixels.resize(rowbytes * h);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, pixels.data() + rowbytes * y, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  width = static_cast<int>(w);
  height = static_cast<int>(h);
  return {};
}

struct JpegErrorState {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

extern "C" inline void jpeg_error_longjmp(j_common_ptr cinfo) {
  auto* state = reinterpret_cast<JpegErrorState*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, state->message);
  std::longjmp(state->jump, 1);
}

// Truncated data is only a warning in libjpeg (the decoder pads with gray);
// treat it as corruption.
extern "C" inline void jpeg_warning_filter(j_common_ptr cinfo, int level) {
  if (level < 0 && cinfo->err->msg_code == JWRN_JPEG_EOF) (*cinfo->err->error_exit)(cinfo);
}

inline std::string decode_jpeg_rgb(const std::vector<unsigned char>& bytes,
                                   std::vector<unsigned char>& pixels, int& width,
                                   int& height) {
  jpeg_decompress_struct cinfo{};
  JpegErrorState state{};
  cinfo.err = jpeg_std_error(&state.mgr);
  state.mgr.error_exit = jpeg_error_longjmp;
  state.mgr.emit_message = jpeg_warning_filter;
  if (setjmp(state.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return state.message[0] != '\0' ? state.message : "corrupt JPEG";
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components != 1 && cinfo.num_components != 3) {
    std::snprintf(state.message, sizeof(state.message),
                  "unsupported JPEG with %d components", cinfo.num_components);
    jpeg_destroy_decompress(&cinfo);
    return state.message;
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t rowbytes = static_cast<std::size_t>(cinfo.output_width) * 3;
  pixels.resize(rowbytes * cinfo.output_height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + rowbytes * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return {};
}

struct PngWriteSink {
  std::vector<unsigned char>* out;
};

extern "C" inline void png_write_to_memory(png_structp png, png_bytep data,
                                           png_size_t count) {
  auto* sink = static_cast<PngWriteSink*>(png_get_io_ptr(png));
  sink->out->insert(sink->out->end(), data, data + count);
}

extern "C" inline void png_flush_noop(png_structp) {}

inline std::string encode_png_rgb(const std::vector<unsigned char>& pixels, int width,
                                  int height, std::vector<unsigned char>& encoded) {
  PngErrorState state{};
  PngWriteSink sink{&encoded};
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state,
                                            png_error_longjmp, png_warning_ignore);
  if (png == nullptr) return "png_create_write_struct failed";
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return "png_create_info_struct failed";
  }
  if (setjmp(state.jump)) {
    png_destroy_write_struct(&png, &info);
    return state.message;
  }
  png_set_write_fn(png, &sink, png_write_to_memory, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * 3;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, pixels.data() + rowbytes * y);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return {};
}

}  // namespace detail

// Decodes a PNG or JPEG file (sniffed by signature) into an RGB Image.
// Grayscale is replicated to three channels, alpha is dropped and 16-bit PNG
// is reduced to 8 bits.
inline Image load_image(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = detail::read_file_bytes(path);
  std::vector<unsigned char> pixels;
  int width = 0;
  int height = 0;
  std::string err;
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) {
    err = detail::decode_png_rgb(bytes, pixels, width, height);
  } else if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 &&
             bytes[2] == 0xFF) {
    err = detail::decode_jpeg_rgb(bytes, pixels, width, height);
  } else {
    throw FormatError("unsupported image format (expected PNG or JPEG): " +
                      path.string());
  }
  if (!err.empty()) throw FormatError(path.string() + ": " + err);
  if (width < 1 || height < 1) throw FormatError(path.string() + ": empty image");
  std::vector<double> samples(pixels.begin(), pixels.end());
  return Image(width, height, std::move(samples));
}

// Writes an 8-bit RGB PNG. The image must already be quantized.
inline void save_image(const Image& img, const std::filesystem::path& path) {
  if (!is_quantized(img)) {
    throw PreconditionError("save_image requires integer samples in [0,255]; quantize first");
  }
  std::vector<unsigned char> pixels(img.samples().size());
  std::transform(img.samples().begin(), img.samples().end(), pixels.begin(),
                 [](double v) { return static_cast<unsigned char>(v); });
  std::vector<unsigned char> encoded;
  const std::string err =
      detail::encode_png_rgb(pixels, img.width(), img.height(), encoded);
  if (!err.empty()) throw IoError("PNG encoding failed: " + err);
  detail::write_file_bytes(path, encoded);
}

}  // namespace srattack
