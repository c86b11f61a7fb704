#include "midsim/raster/example_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "midsim/core/error.hpp"

namespace midsim::raster {

namespace {

constexpr char kMagic[12] = {'m', 'i', 'd', 's', 'i', 'm',
                             '-', 'e', 'x', ' ', 'v', '1'};
constexpr std::uint32_t kFlagDropout = 1u;
constexpr std::uint32_t kFlagPerturbed = 2u;

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& is, T* v) {
  is.read(reinterpret_cast<char*>(v), sizeof(T));
}

}  // namespace

void save_example(const std::string& path, const RenderedExample& ex,
                  const RenderConfig& cfg) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  const int n = cfg.n_future;
  const std::uint32_t c_input = static_cast<std::uint32_t>(ex.input.channels.c);
  const std::uint32_t c_total = c_input + 2 * n + 2;
  std::uint32_t flags = 0;
  if (ex.past_dropout) flags |= kFlagDropout;
  if (ex.perturbed) flags |= kFlagPerturbed;

  os.write(kMagic, sizeof(kMagic));
  write_pod(os, static_cast<std::uint32_t>(cfg.width_px));
  write_pod(os, static_cast<std::uint32_t>(cfg.height_px));
  write_pod(os, c_total);
  write_pod(os, c_input);
  write_pod(os, static_cast<std::uint32_t>(n));
  write_pod(os, flags);
  write_pod(os, ex.weight);

  const auto write_tensor = [&os](const TensorF& t) {
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(float)));
  };
  write_tensor(ex.input.channels);
  write_tensor(ex.targets.ego_box_masks);
  write_tensor(ex.targets.object_masks);
  write_tensor(ex.targets.road_mask);
  write_tensor(ex.targets.geometry_mask);

  for (int k = 0; k < n; ++k) {
    write_pod(os, ex.targets.waypoint_px[k].x);
    write_pod(os, ex.targets.waypoint_px[k].y);
    write_pod(os, ex.targets.subpixel[k].x);
    write_pod(os, ex.targets.subpixel[k].y);
    write_pod(os, ex.targets.theta_frame[k]);
    write_pod(os, ex.targets.speed[k]);
  }
  if (!os) throw IoError("short write to " + path);
}

RenderedExample load_example(const std::string& path, const RenderConfig& cfg) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[12];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a midsim-ex v1 file: " + path);

  std::uint32_t w, h, c_total, c_input, n, flags;
  float weight;
  read_pod(is, &w);
  read_pod(is, &h);
  read_pod(is, &c_total);
  read_pod(is, &c_input);
  read_pod(is, &n);
  read_pod(is, &flags);
  read_pod(is, &weight);
  if (static_cast<int>(w) != cfg.width_px ||
      static_cast<int>(h) != cfg.height_px ||
      static_cast<int>(n) != cfg.n_future ||
      static_cast<int>(c_input) != cfg.input_channels() ||
      c_total != c_input + 2 * n + 2)
    throw ConfigMismatch("example file does not match the render config");

  RenderedExample ex;
  ex.weight = weight;
  ex.past_dropout = (flags & kFlagDropout) != 0;
  ex.perturbed = (flags & kFlagPerturbed) != 0;

  const auto read_tensor = [&is](TensorF& t) {
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
  };
  ex.input.channels = TensorF(c_input, h, w);
  read_tensor(ex.input.channels);
  ex.targets.ego_box_masks = TensorF(n, h, w);
  read_tensor(ex.targets.ego_box_masks);
  ex.targets.object_masks = TensorF(n, h, w);
  read_tensor(ex.targets.object_masks);
  ex.targets.road_mask = TensorF(1, h, w);
  read_tensor(ex.targets.road_mask);
  ex.targets.geometry_mask = TensorF(1, h, w);
  read_tensor(ex.targets.geometry_mask);

  for (std::uint32_t k = 0; k < n; ++k) {
    Vec2 uv, sub;
    double theta, speed;
    read_pod(is, &uv.x);
    read_pod(is, &uv.y);
    read_pod(is, &sub.x);
    read_pod(is, &sub.y);
    read_pod(is, &theta);
    read_pod(is, &speed);
    ex.targets.waypoint_px.push_back(uv);
    ex.targets.coarse_px.push_back({static_cast<int>(std::floor(uv.x)),
                                    static_cast<int>(std::floor(uv.y))});
    ex.targets.subpixel.push_back(sub);
    ex.targets.theta_frame.push_back(theta);
    ex.targets.speed.push_back(speed);
  }
  if (!is) throw IoError("short read from " + path);
  return ex;
}

}  // namespace midsim::raster
