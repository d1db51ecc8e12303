/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#include "gsedit/image.hpp"
#include "gsedit/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>

namespace gsedit {

    std::size_t Mask::count() const {
        return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; }));
    }

    namespace {
        struct FileCloser {
            void operator()(std::FILE* f) const {
                if (f)
                    std::fclose(f);
            }
        };

        void write_png_bytes(const std::vector<std::uint8_t>& bytes, int width, int height, int channels,
                             const std::filesystem::path& path) {
            std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "wb"));
            if (!file) {
                fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
            }
            png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
            png_infop info = png ? png_create_info_struct(png) : nullptr;
            if (!png || !info) {
                png_destroy_write_struct(&png, &info);
                fail(ErrorCode::Internal, "libpng initialization failed");
            }
            if (setjmp(png_jmpbuf(png))) {
                png_destroy_write_struct(&png, &info);
                fail(ErrorCode::Io, "libpng failed writing " + path.string());
            }
            png_init_io(png, file.get());
            png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                         channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                         PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
            png_write_info(png, info);
            const std::size_t stride = static_cast<std::size_t>(width) * channels;
            for (int y = 0; y < height; ++y) {
                png_write_row(png, const_cast<png_bytep>(bytes.data() + y * stride));
            }
            png_write_end(png, nullptr);
            png_destroy_write_struct(&png, &info);
        }
    } // namespace

    void write_png(const Image& image, const std::filesystem::path& path) {
        if (image.channels != 1 && image.channels != 3) {
            fail(ErrorCode::InvalidArgument, "PNG export supports 1 or 3 channels");
        }
        std::vector<std::uint8_t> bytes(image.size());
        std::transform(image.data.begin(), image.data.end(), bytes.begin(), [](double v) {
            const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
            return static_cast<std::uint8_t>(std::lround(c * 255.0));
        });
        write_png_bytes(bytes, image.width, image.height, image.channels, path);
    }

    void write_png(const Mask& mask, const std::filesystem::path& path) {
        std::vector<std::uint8_t> bytes(mask.data.size());
        std::transform(mask.data.begin(), mask.data.end(), bytes.begin(),
                       [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
        write_png_bytes(bytes, mask.width, mask.height, 1, path);
    }

    Image resample_bilinear(const Image& src, int width, int height) {
        if (width <= 0 || height <= 0 || src.width <= 0 || src.height <= 0) {
            fail(ErrorCode::InvalidArgument, "resample_bilinear: empty image");
        }
        if (width == src.width && height == src.height) {
            return src;
        }
        Image out(width, height, src.channels);
        const double sx = static_cast<double>(src.width) / width;
        const double sy = static_cast<double>(src.height) / height;
        for (int y = 0; y < height; ++y) {
            const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
            const int y0 = static_cast<int>(std::floor(fy));
            const int y1 = std::min(y0 + 1, src.height - 1);
            const double ty = fy - y0;
            for (int x = 0; x < width; ++x) {
                const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
                const int x0 = static_cast<int>(std::floor(fx));
                const int x1 = std::min(x0 + 1, src.width - 1);
                const double tx = fx - x0;
                for (int c = 0; c < src.channels; ++c) {
                    const double top = (1.0 - tx) * src.at(x0, y0, c) + tx * src.at(x1, y0, c);
                    const double bottom = (1.0 - tx) * src.at(x0, y1, c) + tx * src.at(x1, y1, c);
                    out.at(x, y, c) = (1.0 - ty) * top + ty * bottom;
                }
            }
        }
        return out;
    }

} // namespace gsedit
