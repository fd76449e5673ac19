// Compares the OpenMP kernels against their serial reference implementations
// and checks they produce identical results.

#include <chrono>
#include <cstdio>
#include <random>

#include "wagon/binding.hpp"
#include "wagon/r1cs.hpp"

using Clock = std::chrono::steady_clock;

template <typename F>
static double time_ms(F&& fn, int iters) {
    auto t0 = Clock::now();
    for (int i = 0; i < iters; ++i) fn();
    auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

int main() {
    std::mt19937_64 rng(7);

    {  // dense accumulate, 1024 x 4096
        const std::size_t out = 1024, in = 4096;
        std::vector<std::int64_t> w(out * in), b(out), x(in);
        std::uniform_int_distribution<std::int64_t> dist(-128, 128);
        for (auto& v : w) v = dist(rng);
        for (auto& v : b) v = dist(rng);
        for (auto& v : x) v = dist(rng);
        auto serial = wagon::graph::reference::dense_accumulate(w, b, x, out, in, 8);
        auto parallel = wagon::graph::dense_accumulate(w, b, x, out, in, 8);
        bool same = serial == parallel;
        double ts = time_ms([&] { wagon::graph::reference::dense_accumulate(w, b, x, out, in, 8); }, 20);
        double tp = time_ms([&] { wagon::graph::dense_accumulate(w, b, x, out, in, 8); }, 20);
        std::printf("dense_accumulate  serial %8.3f ms  parallel %8.3f ms  speedup %5.2fx  match=%s\n",
                    ts, tp, ts / tp, same ? "yes" : "NO");
    }

    {  // constraint satisfaction on a wide synthetic system
        wagon::r1cs::R1CSInstance inst;
        const std::size_t n = 200000;
        inst.num_wires = static_cast<std::uint32_t>(2 * n + 1);
        inst.num_public = 1;
        wagon::r1cs::Witness wit;
        wit.assignment.assign(inst.num_wires, 0);
        wit.assignment[0] = 1;
        std::uniform_int_distribution<std::uint64_t> fdist(0, wagon::kDefaultModulus - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t v = fdist(rng);
            wit.assignment[1 + i] = v;
            wit.assignment[1 + n + i] = v;
            wagon::r1cs::Constraint c;
            c.a[static_cast<std::uint32_t>(1 + i)] = 1;
            c.b[0] = 1;
            c.c[static_cast<std::uint32_t>(1 + n + i)] = 1;
            inst.constraints.push_back(std::move(c));
        }
        auto rs = wagon::r1cs::reference::check_satisfaction(inst, wit);
        auto rp = wagon::r1cs::check_satisfaction(inst, wit);
        bool same = rs.ok == rp.ok && rs.first_violated == rp.first_violated;
        double ts = time_ms([&] { wagon::r1cs::reference::check_satisfaction(inst, wit); }, 10);
        double tp = time_ms([&] { wagon::r1cs::check_satisfaction(inst, wit); }, 10);
        std::printf("check_satisfaction serial %7.3f ms  parallel %8.3f ms  speedup %5.2fx  match=%s\n",
                    ts, tp, ts / tp, same ? "yes" : "NO");
    }

    {  // perceptual hash on a 2048x1024 raster
        wagon::RasterImage img = wagon::make_image(2048, 1024);
        std::uniform_int_distribution<int> pix(0, 255);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(pix(rng));
        auto hs = wagon::binding::reference::average_hash(img);
        auto hp = wagon::binding::average_hash(img);
        bool same = hs == hp;
        double ts = time_ms([&] { wagon::binding::reference::average_hash(img); }, 20);
        double tp = time_ms([&] { wagon::binding::average_hash(img); }, 20);
        std::printf("average_hash      serial %8.3f ms  parallel %8.3f ms  speedup %5.2fx  match=%s\n",
                    ts, tp, ts / tp, same ? "yes" : "NO");
    }
    return 0;
}
