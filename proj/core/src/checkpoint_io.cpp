#include "sbmri/io.hpp"

#include <zlib.h>

#include <sstream>

#include "io_util.hpp"

namespace sbmri {

namespace {
constexpr char kMagic[4] = {'S', 'B', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc_of(const std::string& bytes) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size())));
}
} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ostringstream body(std::ios::binary);
    io::write_pod(body, kVersion);
    io::write_pod(body, static_cast<std::uint32_t>(ckpt.arch.height));
    io::write_pod(body, static_cast<std::uint32_t>(ckpt.arch.width));
    io::write_pod(body, static_cast<std::uint32_t>(ckpt.arch.channels));
    io::write_pod(body, static_cast<std::uint32_t>(ckpt.arch.blocks));
    io::write_pod(body, static_cast<std::uint32_t>(ckpt.arch.time_dim));
    io::write_pod(body, static_cast<std::uint32_t>(ckpt.arch.groups));
    io::write_pod(body, static_cast<std::uint8_t>(ckpt.arch.use_norm));
    io::write_pod(body, static_cast<std::uint8_t>(ckpt.arch.use_activation));
    io::write_pod(body, ckpt.beta_min);
    io::write_pod(body, ckpt.beta_max);
    io::write_pod(body, static_cast<std::uint64_t>(ckpt.schedule_steps));
    io::write_pod(body, static_cast<std::uint64_t>(ckpt.params.size()));
    io::write_pod(body, static_cast<std::uint64_t>(ckpt.adam.step));
    io::write_pod(body, ckpt.cfg_hash);
    io::write_f32(body, ckpt.params);
    io::write_f32(body, ckpt.adam.m);
    io::write_f32(body, ckpt.adam.v);

    const std::string bytes = body.str();
    auto os = io::open_out(path);
    io::write_magic(os, kMagic);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    io::write_pod(os, crc_of(bytes));
    if (!os) throw FileFormatError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    auto is = io::open_in(path);
    io::expect_magic(is, kMagic, "checkpoint");

    // Slurp the rest, split off the trailing CRC, verify.
    std::string rest((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (rest.size() < sizeof(std::uint32_t))
        throw FileFormatError("checkpoint: truncated file");
    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, rest.data() + rest.size() - 4, 4);
    rest.resize(rest.size() - 4);
    if (crc_of(rest) != stored_crc)
        throw FileFormatError("checkpoint: checksum mismatch");

    std::istringstream body(rest, std::ios::binary);
    io::expect_version(body, kVersion, "checkpoint");
    Checkpoint c;
    c.arch.height = io::read_pod<std::uint32_t>(body);
    c.arch.width = io::read_pod<std::uint32_t>(body);
    c.arch.channels = io::read_pod<std::uint32_t>(body);
    c.arch.blocks = io::read_pod<std::uint32_t>(body);
    c.arch.time_dim = io::read_pod<std::uint32_t>(body);
    c.arch.groups = io::read_pod<std::uint32_t>(body);
    c.arch.use_norm = io::read_pod<std::uint8_t>(body) != 0;
    c.arch.use_activation = io::read_pod<std::uint8_t>(body) != 0;
    c.beta_min = io::read_pod<double>(body);
    c.beta_max = io::read_pod<double>(body);
    c.schedule_steps = io::read_pod<std::uint64_t>(body);
    const auto n_params = io::read_pod<std::uint64_t>(body);
    c.adam.step = io::read_pod<std::uint64_t>(body);
    c.cfg_hash = io::read_pod<std::uint64_t>(body);
    c.params = io::read_f32(body, n_params);
    c.adam.m = io::read_f32(body, n_params);
    c.adam.v = io::read_f32(body, n_params);
    return c;
}

Checkpoint make_checkpoint(const ConvDenoiser& d, const AdamState& adam,
                           std::uint64_t cfg_hash) {
    Checkpoint c;
    c.arch = d.arch();
    c.beta_min = d.schedule().beta_min();
    c.beta_max = d.schedule().beta_max();
    c.schedule_steps = d.schedule().n_steps();
    c.params = d.params();
    c.adam = adam;
    c.cfg_hash = cfg_hash;
    return c;
}

} // namespace sbmri
