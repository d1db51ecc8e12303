/* SPDX-FileCopyrightText: 2026 gsedit authors
 *
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gsedit {

    /// Row-major height x width x channels image of doubles.
    struct Image {
        int width = 0;
        int height = 0;
        int channels = 0;
        std::vector<double> data;

        Image() = default;
        Image(int w, int h, int c, double fill = 0.0)
            : width(w),
              height(h),
              channels(c),
              data(static_cast<std::size_t>(w) * h * c, fill) {}

        std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
        std::size_t size() const { return data.size(); }

        double& at(int x, int y, int c = 0) {
            return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
        }
        double at(int x, int y, int c = 0) const {
            return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
        }

        bool same_shape(const Image& other) const {
            return width == other.width && height == other.height && channels == other.channels;
        }

        bool operator==(const Image&) const = default;
    };

    /// Row-major binary mask.
    struct Mask {
        int width = 0;
        int height = 0;
        std::vector<std::uint8_t> data;

        Mask() = default;
        Mask(int w, int h, bool fill = false)
            : width(w),
              height(h),
              data(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

        bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
        void set(int x, int y, bool v) { data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
        std::size_t count() const;

        bool operator==(const Mask&) const = default;
    };

    /// 8-bit PNG; values are clamped to [0,1] and mapped linearly. 1 or 3 channels.
    void write_png(const Image& image, const std::filesystem::path& path);
    void write_png(const Mask& mask, const std::filesystem::path& path);

    /// Bilinear resampling with pixel centers aligned (align_corners = false).
    Image resample_bilinear(const Image& src, int width, int height);

} // namespace gsedit
