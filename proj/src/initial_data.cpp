#include "torusflow/initial_data.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, const std::string& context) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number '" + s + "' in initial-data term '" +
                          context + "'");
    }
}

// splitmix64: portable, stable stream of uniform doubles in [-1, 1)
struct PortableRng {
    uint64_t state;
    explicit PortableRng(uint64_t seed) : state(seed) {}
    double next() {
        state += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z = z ^ (z >> 31);
        const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
        return 2.0 * u - 1.0;
    }
};

}  // namespace

InitSpec parse_init_spec(const std::string& text) {
    InitSpec spec;
    for (std::string term : split(text, '+')) {
        // allow "name value" as a synonym for "name:value"
        for (char& ch : term) {
            if (ch == ' ') ch = ':';
        }
        while (!term.empty() && term.front() == ':') term.erase(term.begin());
        if (term.empty()) continue;
        auto parts = split(term, ':');
        const std::string& name = parts[0];
        auto amplitude = [&](double fallback) {
            return parts.size() > 1 ? parse_number(parts[1], term) : fallback;
        };
        if (name == "constant") {
            if (parts.size() > 1) {
                throw ConfigError("'constant' takes no amplitude");
            }
        } else if (name == "cos_x") {
            spec.modes.push_back({1, 0, amplitude(0.1), 0.0});
        } else if (name == "sin_x") {
            spec.modes.push_back({1, 0, 0.0, amplitude(0.1)});
        } else if (name == "cos_y") {
            spec.modes.push_back({0, 1, amplitude(0.1), 0.0});
        } else if (name == "sin_y") {
            spec.modes.push_back({0, 1, 0.0, amplitude(0.1)});
        } else if (name == "mode") {
            if (parts.size() != 5) {
                throw ConfigError(
                    "'mode' takes m:n:amp_cos:amp_sin, got '" + term + "'");
            }
            ModeTerm mt;
            mt.m = static_cast<int>(parse_number(parts[1], term));
            mt.n = static_cast<int>(parse_number(parts[2], term));
            mt.amp_cos = parse_number(parts[3], term);
            mt.amp_sin = parse_number(parts[4], term);
            spec.modes.push_back(mt);
        } else if (name == "noise") {
            spec.noise_amplitude = amplitude(0.01);
            if (parts.size() > 2) {
                spec.noise_kmax =
                    static_cast<int>(parse_number(parts[2], term));
            }
        } else {
            throw ConfigError("unknown initial-data term '" + name + "'");
        }
    }
    return spec;
}

Field random_lowpass(std::shared_ptr<const TorusGrid> grid, unsigned long seed,
                     double amplitude, int kmax) {
    PortableRng rng(seed);
    Field f(grid, 0.0);
    const double a = grid->a();
    const double b = grid->b();
    const double two_pi = 2.0 * std::numbers::pi;
    for (int m = 0; m <= kmax; ++m) {
        for (int n = (m == 0 ? 1 : -kmax); n <= kmax; ++n) {
            const double ac = rng.next();
            const double as = rng.next();
            const double scale = amplitude / (1.0 + m * m + n * n);
            for (int iy = 0; iy < grid->ny(); ++iy) {
                for (int ix = 0; ix < grid->nx(); ++ix) {
                    const double phase =
                        two_pi * (m * grid->x(ix) / a + n * grid->y(iy) / b);
                    f.at(ix, iy) +=
                        scale * (ac * std::cos(phase) + as * std::sin(phase));
                }
            }
        }
    }
    return f;
}

Field build_initial_w(std::shared_ptr<const TorusGrid> grid, double lambda,
                      const InitSpec& spec, unsigned long noise_seed) {
    if (!(lambda > 0.0)) throw ConfigError("initial data requires lambda > 0");
    Field w(grid, std::log(lambda / grid->area()));
    const double two_pi = 2.0 * std::numbers::pi;
    for (const ModeTerm& mt : spec.modes) {
        for (int iy = 0; iy < grid->ny(); ++iy) {
            for (int ix = 0; ix < grid->nx(); ++ix) {
                const double phase = two_pi * (mt.m * grid->x(ix) / grid->a() +
                                               mt.n * grid->y(iy) / grid->b());
                w.at(ix, iy) += mt.amp_cos * std::cos(phase) +
                                mt.amp_sin * std::sin(phase);
            }
        }
    }
    if (spec.noise_amplitude != 0.0) {
        w = w + random_lowpass(grid, noise_seed, spec.noise_amplitude,
                               spec.noise_kmax);
    }
    return w;
}

}  // namespace torusflow
