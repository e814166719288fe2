#include "sbmri/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace sbmri {

namespace {

// fftw planning is not thread-safe; plans are cached per (H, W, sign).
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    ComplexImage run(const ComplexImage& x, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        const Key key{x.height(), x.width(), sign};
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            // In-place plan on a scratch buffer; FFTW_ESTIMATE keeps planning
            // deterministic and does not touch the array contents.
            scratch_.assign(x.size(), {});
            auto* buf = reinterpret_cast<fftw_complex*>(scratch_.data());
            fftw_plan p = fftw_plan_dft_2d(static_cast<int>(x.height()),
                                           static_cast<int>(x.width()),
                                           buf, buf, sign,
                                           FFTW_ESTIMATE | FFTW_UNALIGNED);
            it = plans_.emplace(key, p).first;
        }
        ComplexImage out = x;
        fftw_execute_dft(it->second,
                         reinterpret_cast<fftw_complex*>(out.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
        const double scale = 1.0 / std::sqrt(static_cast<double>(x.size()));
        out *= scale;
        return out;
    }

private:
    using Key = std::tuple<std::size_t, std::size_t, int>;
    ~PlanCache() {
        for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    }
    std::mutex mu_;
    std::map<Key, fftw_plan> plans_;
    std::vector<cplx> scratch_;
};

} // namespace

ComplexImage fft2(const ComplexImage& x) { return PlanCache::instance().run(x, FFTW_FORWARD); }
ComplexImage ifft2(const ComplexImage& x) { return PlanCache::instance().run(x, FFTW_BACKWARD); }

} // namespace sbmri
