#include "midsim/net/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "midsim/core/error.hpp"

namespace midsim::net {

namespace {
constexpr char kMagic[14] = {'m', 'i', 'd', 's', 'i', 'm', '-',
                             'c', 'k', 'p', 't', ' ', 'v', '1'};
}

void save_checkpoint(const std::string& path, const NetParams<float>& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  const std::uint64_t arch_hash = params.arch.hash();
  os.write(reinterpret_cast<const char*>(&arch_hash), sizeof(arch_hash));
  const std::uint32_t count = static_cast<std::uint32_t>(params.values.size());
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    const std::uint32_t name_len =
        static_cast<std::uint32_t>(params.names[i].size());
    os.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    os.write(params.names[i].data(), name_len);
    const Tensor<float>& t = params.values[i];
    const std::uint32_t dims[3] = {static_cast<std::uint32_t>(t.c),
                                   static_cast<std::uint32_t>(t.h),
                                   static_cast<std::uint32_t>(t.w)};
    os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
  if (!os) throw IoError("short write to " + path);
}

NetParams<float> load_checkpoint(const std::string& path,
                                 const ArchConfig& arch) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[14];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a midsim-ckpt v1 file: " + path);
  std::uint64_t arch_hash = 0;
  is.read(reinterpret_cast<char*>(&arch_hash), sizeof(arch_hash));
  if (arch_hash != arch.hash())
    throw ConfigMismatch("checkpoint architecture hash mismatch");

  NetParams<float> params;
  params.arch = arch;
  std::uint32_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = 0;
    is.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    std::uint32_t dims[3];
    is.read(reinterpret_cast<char*>(dims), sizeof(dims));
    Tensor<float> t(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                    static_cast<int>(dims[2]));
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
    params.names.push_back(std::move(name));
    params.values.push_back(std::move(t));
  }
  if (!is) throw IoError("short read from " + path);
  return params;
}

}  // namespace midsim::net
