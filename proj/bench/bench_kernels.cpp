// Times each serial kernel against its OpenMP variant on training-sized
// shapes and cross-checks that the outputs stay bit-identical. Pass a repeat
// count to change the default of 5 (best run is reported).
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "vinpaint/kernels.hpp"
#include "vinpaint/rng.hpp"

using namespace vinpaint;
namespace k = vinpaint::kernels;

namespace {

int g_reps = 5;

std::vector<float> randv(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.normal() * scale);
    return v;
}

double best_us(const std::function<void()>& fn) {
    double best = 1e30;
    for (int r = 0; r < g_reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, std::vector<float>& out_serial, std::vector<float>& out_omp,
            const std::function<void()>& serial, const std::function<void()>& omp) {
    const double ts = best_us([&] {
        std::memset(out_serial.data(), 0, out_serial.size() * sizeof(float));
        serial();
    });
    const double tp = best_us([&] {
        std::memset(out_omp.data(), 0, out_omp.size() * sizeof(float));
        omp();
    });
    const bool same =
        std::memcmp(out_serial.data(), out_omp.data(), out_serial.size() * sizeof(float)) == 0;
    std::printf("%-22s %10.1f us %10.1f us   %5.2fx   %s\n", name, ts, tp, ts / tp,
                same ? "bit-identical" : "MISMATCH");
    if (!same) std::exit(1);
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_reps = std::max(1, std::atoi(argv[1]));
    Rng rng(0xBE7C);
    std::printf("threads: %d, repeats: %d (best shown)\n", omp_get_max_threads(), g_reps);
    std::printf("%-22s %13s %13s %8s\n", "kernel", "serial", "openmp", "speedup");

    {
        const std::int64_t N = 2, C = 16, H = 64, W = 64, K = 16, kh = 3, kw = 3;
        const auto x = randv(rng, N * C * H * W);
        const auto w = randv(rng, K * C * kh * kw, 0.1);
        const auto b = randv(rng, K, 0.1);
        std::vector<float> ys(N * K * H * W), yp(ys.size());
        report("conv2d forward", ys, yp,
               [&] {
                   k::conv2d_forward_serial<float>(N, C, H, W, K, kh, kw, 1, 1, x.data(), w.data(),
                                                   b.data(), ys.data());
               },
               [&] {
                   k::conv2d_forward_omp<float>(N, C, H, W, K, kh, kw, 1, 1, x.data(), w.data(),
                                                b.data(), yp.data());
               });
        const auto gy = randv(rng, N * K * H * W);
        std::vector<float> gxs(x.size()), gxp(x.size());
        report("conv2d dgrad", gxs, gxp,
               [&] {
                   k::conv2d_dgrad_serial<float>(N, C, H, W, K, kh, kw, 1, 1, gy.data(), w.data(),
                                                 gxs.data());
               },
               [&] {
                   k::conv2d_dgrad_omp<float>(N, C, H, W, K, kh, kw, 1, 1, gy.data(), w.data(),
                                              gxp.data());
               });
        std::vector<float> gws(w.size()), gwp(w.size());
        report("conv2d wgrad", gws, gwp,
               [&] {
                   k::conv2d_wgrad_serial<float>(N, C, H, W, K, kh, kw, 1, 1, gy.data(), x.data(),
                                                 gws.data());
               },
               [&] {
                   k::conv2d_wgrad_omp<float>(N, C, H, W, K, kh, kw, 1, 1, gy.data(), x.data(),
                                              gwp.data());
               });
    }
    {
        const std::int64_t N = 1, C = 8, D = 8, H = 32, W = 32, K = 8, kd = 3, kh = 3, kw = 3;
        const auto x = randv(rng, N * C * D * H * W);
        const auto w = randv(rng, K * C * kd * kh * kw, 0.1);
        const auto b = randv(rng, K, 0.1);
        std::vector<float> ys(N * K * D * H * W), yp(ys.size());
        report("conv3d forward", ys, yp,
               [&] {
                   k::conv3d_forward_serial<float>(N, C, D, H, W, K, kd, kh, kw, 1, 1, 1, 1, 1, 1,
                                                   x.data(), w.data(), b.data(), ys.data());
               },
               [&] {
                   k::conv3d_forward_omp<float>(N, C, D, H, W, K, kd, kh, kw, 1, 1, 1, 1, 1, 1,
                                                x.data(), w.data(), b.data(), yp.data());
               });
    }
    {
        const std::int64_t M = 256, K = 256, N = 256;
        const auto a = randv(rng, M * K);
        const auto b = randv(rng, K * N);
        std::vector<float> ys(M * N), yp(M * N);
        report("matmul 256^3", ys, yp,
               [&] { k::matmul_nn_serial<float>(M, K, N, a.data(), b.data(), ys.data()); },
               [&] { k::matmul_nn_omp<float>(M, K, N, a.data(), b.data(), yp.data()); });
    }
    {
        const std::int64_t n = 1 << 20;
        const auto x = randv(rng, n);
        std::vector<float> ys(n), yp(n);
        report("sigmoid 1M", ys, yp,
               [&] { k::unary_forward_serial<float>(k::Unary::sigmoid, n, x.data(), ys.data(), 0); },
               [&] { k::unary_forward_omp<float>(k::Unary::sigmoid, n, x.data(), yp.data(), 0); });
        const auto b = randv(rng, n);
        report("add 1M", ys, yp,
               [&] {
                   k::binary_forward_serial<float>(k::Binary::add, n, x.data(), 1, b.data(), 1,
                                                   ys.data());
               },
               [&] {
                   k::binary_forward_omp<float>(k::Binary::add, n, x.data(), 1, b.data(), 1,
                                                yp.data());
               });
    }
    {
        const std::int64_t n = 1 << 22;
        const auto x = randv(rng, n);
        std::vector<float> ys(1), yp(1);
        report("block_sum 4M", ys, yp,
               [&] { ys[0] = k::block_sum_serial<float>(n, x.data()); },
               [&] { yp[0] = k::block_sum_omp<float>(n, x.data()); });
    }
    {
        const std::int64_t C = 16, H = 256, W = 256;
        const auto src = randv(rng, C * H * W);
        auto fl = randv(rng, H * W * 2, 2.0);
        std::vector<float> ys(C * H * W), yp(ys.size());
        report("warp 16x256x256", ys, yp,
               [&] {
                   k::warp_bilinear_serial<float>(C, H, W, src.data(), fl.data(), ys.data(),
                                                  nullptr);
               },
               [&] {
                   k::warp_bilinear_omp<float>(C, H, W, src.data(), fl.data(), yp.data(), nullptr);
               });
    }
    {
        const std::int64_t T = 8, C = 32, H = 128, W = 128, f = 4;
        const auto x = randv(rng, T * C * H * W);
        std::vector<float> ys(x.size()), yp(x.size());
        report("temporal shift", ys, yp,
               [&] {
                   k::temporal_shift_serial<float>(T, C, H, W, f, false, x.data(), ys.data());
               },
               [&] { k::temporal_shift_omp<float>(T, C, H, W, f, false, x.data(), yp.data()); });
    }
    {
        const std::int64_t n = 1 << 20;
        const auto g = randv(rng, n);
        const auto p0 = randv(rng, n);
        std::vector<float> ps(p0), pp(p0), ms(n, 0.f), mp(n, 0.f), vs(n, 0.f), vp(n, 0.f);
        // Stateful, so re-seed params/moments inside the timed body.
        report("adam update 1M", ps, pp,
               [&] {
                   ps = p0;
                   std::fill(ms.begin(), ms.end(), 0.f);
                   std::fill(vs.begin(), vs.end(), 0.f);
                   k::adam_update_serial<float>(n, ps.data(), g.data(), ms.data(), vs.data(),
                                                1e-3f, 0.9f, 0.999f, 1e-8f, 0.1f, 0.001f);
               },
               [&] {
                   pp = p0;
                   std::fill(mp.begin(), mp.end(), 0.f);
                   std::fill(vp.begin(), vp.end(), 0.f);
                   k::adam_update_omp<float>(n, pp.data(), g.data(), mp.data(), vp.data(), 1e-3f,
                                             0.9f, 0.999f, 1e-8f, 0.1f, 0.001f);
               });
    }
    return 0;
}
