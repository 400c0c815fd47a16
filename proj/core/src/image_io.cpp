#include "lfs/image_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "lfs/errors.hpp"
#include "lfs/resample.hpp"

namespace lfs {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw io_error("cannot open '" + path + "'");
    return f;
}

// ---- PNG ----

Image read_png(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("libpng init failed");
    }
    std::vector<std::uint8_t> interleaved;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("corrupt PNG '" + path + "'");
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("PNG '" + path + "' did not expand to RGB");
    }

    interleaved.resize(static_cast<std::size_t>(w) * h * 3);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = interleaved.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_rgb8(interleaved.data(), w, h);
}

void write_png(const Image& img, std::FILE* fp, const std::string& path) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw io_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("PNG write failed for '" + path + "'");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    auto bytes = to_rgb8(img);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = bytes.data() + static_cast<std::size_t>(y) * img.width * 3;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---- JPEG ----

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    longjmp(mgr->jump, 1);
}

} // namespace

std::vector<std::uint8_t> jpeg_encode(const Image& img, int quality) {
    require(quality >= 1 && quality <= 100, "jpeg_encode: quality in [1,100]");
    jpeg_compress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;

    unsigned char* buf = nullptr;
    unsigned long buf_size = 0;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_compress(&cinfo);
        std::free(buf);
        throw io_error("JPEG encode failed");
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buf, &buf_size);

    cinfo.image_width = static_cast<JDIMENSION>(img.width);
    cinfo.image_height = static_cast<JDIMENSION>(img.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    // 4:4:4 so chroma is quantized on the same grid the differentiable
    // approximation uses.
    for (int i = 0; i < cinfo.num_components; ++i) {
        cinfo.comp_info[i].h_samp_factor = 1;
        cinfo.comp_info[i].v_samp_factor = 1;
    }

    auto bytes = to_rgb8(img);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = bytes.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width * 3;
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);

    std::vector<std::uint8_t> out(buf, buf + buf_size);
    std::free(buf);
    return out;
}

Image jpeg_decode(const std::uint8_t* data, std::size_t size) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw io_error("corrupt JPEG stream");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    std::vector<std::uint8_t> interleaved(static_cast<std::size_t>(w) * h * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row =
            interleaved.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_rgb8(interleaved.data(), w, h);
}

Image load_image_raw(const std::string& path) {
    auto fp = open_file(path, "rb");
    std::uint8_t magic[2] = {0, 0};
    if (std::fread(magic, 1, 2, fp.get()) != 2)
        throw io_error("unreadable image '" + path + "'");
    std::rewind(fp.get());

    if (magic[0] == 0x89 && magic[1] == 'P') return read_png(fp.get(), path);
    if (magic[0] == 0xff && magic[1] == 0xd8) {
        std::fseek(fp.get(), 0, SEEK_END);
        const long len = std::ftell(fp.get());
        std::rewind(fp.get());
        std::vector<std::uint8_t> bytes(static_cast<std::size_t>(len));
        if (std::fread(bytes.data(), 1, bytes.size(), fp.get()) != bytes.size())
            throw io_error("unreadable image '" + path + "'");
        return jpeg_decode(bytes.data(), bytes.size());
    }
    throw io_error("'" + path + "': not a PNG or JPEG file");
}

Image load_image(const std::string& path, int side) {
    require(side >= 1, "load_image: side must be >= 1");
    Image img = load_image_raw(path);
    return resize_bilinear(center_crop_square(img), side, side);
}

void save_png(const Image& img, const std::string& path) {
    auto fp = open_file(path, "wb");
    write_png(img, fp.get(), path);
}

void save_image(const Image& img, const std::string& path, const SaveOptions& opts) {
    if (opts.format == ImageFormat::png) {
        save_png(img, path);
        return;
    }
    auto bytes = jpeg_encode(img, opts.jpeg_quality);
    auto fp = open_file(path, "wb");
    if (std::fwrite(bytes.data(), 1, bytes.size(), fp.get()) != bytes.size())
        throw io_error("short write to '" + path + "'");
}

} // namespace lfs
