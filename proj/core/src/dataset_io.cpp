#include "sbmri/io.hpp"

#include "io_util.hpp"

namespace sbmri {

namespace {
constexpr char kFileMagic[4] = {'S', 'B', 'M', 'D'};
constexpr char kRecMagic[4] = {'R', 'E', 'C', 'D'};
constexpr std::uint32_t kVersion = 1;
} // namespace

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records,
                  std::uint64_t cfg_hash) {
    auto os = io::open_out(path);
    io::write_magic(os, kFileMagic);
    io::write_pod(os, kVersion);
    io::write_pod(os, static_cast<std::uint32_t>(records.size()));
    io::write_pod(os, cfg_hash);

    for (const auto& r : records) {
        io::write_magic(os, kRecMagic);
        io::write_pod(os, kVersion);
        io::write_pod(os, static_cast<std::uint32_t>(r.pair.target.height()));
        io::write_pod(os, static_cast<std::uint32_t>(r.pair.target.width()));
        io::write_pod(os, static_cast<std::uint32_t>(r.csm.coils()));
        io::write_pod(os, r.sigma_eps);
        io::write_pod(os, r.seed);
        io::write_pod(os, static_cast<std::uint32_t>(r.mask.center_h));
        io::write_pod(os, static_cast<std::uint32_t>(r.mask.center_w));

        io::write_complex_f32(os, r.pair.target);
        io::write_complex_f32(os, r.pair.guide);
        for (const auto& m : r.csm.maps) io::write_complex_f32(os, m);
        std::vector<double> mask(r.mask.keep.begin(), r.mask.keep.end());
        io::write_f32(os, mask);
        for (const auto& c : r.y.coils) io::write_complex_f32(os, c);
    }
    if (!os) throw FileFormatError("failed writing dataset: " + path);
}

std::vector<DatasetRecord> load_dataset(const std::string& path, std::uint64_t* cfg_hash) {
    auto is = io::open_in(path);
    io::expect_magic(is, kFileMagic, "dataset file");
    io::expect_version(is, kVersion, "dataset file");
    const auto count = io::read_pod<std::uint32_t>(is);
    const auto hash = io::read_pod<std::uint64_t>(is);
    if (cfg_hash) *cfg_hash = hash;

    std::vector<DatasetRecord> records;
    records.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        io::expect_magic(is, kRecMagic, "dataset record");
        io::expect_version(is, kVersion, "dataset record");
        const auto h = io::read_pod<std::uint32_t>(is);
        const auto w = io::read_pod<std::uint32_t>(is);
        const auto c = io::read_pod<std::uint32_t>(is);
        DatasetRecord r;
        r.sigma_eps = io::read_pod<double>(is);
        r.seed = io::read_pod<std::uint64_t>(is);
        const auto ch = io::read_pod<std::uint32_t>(is);
        const auto cw = io::read_pod<std::uint32_t>(is);

        r.pair.target = io::read_complex_f32(is, h, w);
        r.pair.guide = io::read_complex_f32(is, h, w);
        r.csm.maps.reserve(c);
        for (std::uint32_t i = 0; i < c; ++i)
            r.csm.maps.push_back(io::read_complex_f32(is, h, w));
        const std::vector<double> mask = io::read_f32(is, static_cast<std::size_t>(h) * w);
        r.mask = SamplingMask{h, w, ch, cw, {}};
        r.mask.keep.resize(mask.size());
        for (std::size_t i = 0; i < mask.size(); ++i)
            r.mask.keep[i] = mask[i] > 0.5 ? 1 : 0;
        r.y.mask = r.mask;
        r.y.sigma_eps = r.sigma_eps;
        for (std::uint32_t i = 0; i < c; ++i)
            r.y.coils.push_back(io::read_complex_f32(is, h, w));
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace sbmri
