#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbmri/denoiser.hpp"
#include "sbmri/mri_model.hpp"
#include "sbmri/schedule.hpp"
#include "sbmri/train.hpp"

namespace sbmri {

// ---- dataset files ------------------------------------------------------
// Binary, little-endian. File header (magic "SBMD", version, record count,
// config hash), then one record per phantom pair: header + f32 payloads
// (complex data interleaved re/im).

struct DatasetRecord {
    PhantomPair pair;
    CoilSensitivities csm;
    SamplingMask mask;
    KSpaceData y;
    double sigma_eps = 0;
    std::uint64_t seed = 0;
};

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records,
                  std::uint64_t cfg_hash);
std::vector<DatasetRecord> load_dataset(const std::string& path,
                                        std::uint64_t* cfg_hash = nullptr);

// ---- checkpoints ---------------------------------------------------------
// Magic "SBCK", version, architecture hyperparameters, schedule descriptor,
// flat little-endian f32 payload (params, Adam m, Adam v), trailing CRC32.

struct Checkpoint {
    DenoiserArch arch;
    double beta_min = 0, beta_max = 0;
    std::size_t schedule_steps = 0;
    std::vector<double> params;
    AdamState adam;
    std::uint64_t cfg_hash = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const ConvDenoiser& d, const AdamState& adam,
                           std::uint64_t cfg_hash);

// ---- image payloads and display export -----------------------------------

void save_image(const std::string& path, const ComplexImage& x, std::uint64_t cfg_hash);
ComplexImage load_image(const std::string& path, std::uint64_t* cfg_hash = nullptr);

// 8-bit grayscale PNG of the magnitude, per-image max scaling. The scale
// factor is written to `path + ".scale.txt"`.
void save_png(const std::string& path, const ComplexImage& x);

} // namespace sbmri
