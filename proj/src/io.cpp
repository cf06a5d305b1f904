#include "triphoton/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace triphoton {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string manifest_hash_hex(std::string_view canonical_config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_config)));
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

nlohmann::json complex_json(const std::complex<double>& z) {
    return {{"re", z.real()}, {"im", z.imag()}};
}

std::complex<double> complex_from(const nlohmann::json& j) {
    return {j.at("re").get<double>(), j.at("im").get<double>()};
}

}  // namespace

void write_moment_set_json(const std::string& path, const MomentSet& m, const Provenance& prov,
                           const WitnessResult* witness) {
    nlohmann::json j;
    j["triple"] = complex_json(m.triple);
    j["n"] = m.n;
    j["nn"] = m.nn;
    for (int i = 0; i < 3; ++i) {
        j["first"].push_back(complex_json(m.first[i]));
        j["second_pair"].push_back(complex_json(m.second_pair[i]));
    }
    j["first_err"] = m.first_err;
    j["second_err"] = m.second_err;
    if (m.has_cov()) {
        for (int r = 0; r < 7; ++r) {
            nlohmann::json row;
            for (int c = 0; c < 7; ++c) row.push_back(m.cov(r, c));
            j["cov"].push_back(row);
        }
    }
    j["manifest_hash"] = prov.manifest_hash;
    j["seed"] = prov.seed;
    if (witness) {
        j["witness"] = {{"w", witness->w},
                        {"sigma_stat", witness->sigma_stat},
                        {"sigma_sys_low", witness->sigma_sys_low},
                        {"n_tot", witness->n_tot},
                        {"delta_w_total", witness->delta_w_total}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

MomentSet read_moment_set_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;

    MomentSet m;
    m.triple = complex_from(j.at("triple"));
    for (int i = 0; i < 3; ++i) {
        m.n[i] = j.at("n")[i].get<double>();
        m.nn[i] = j.at("nn")[i].get<double>();
        if (j.contains("first")) m.first[i] = complex_from(j["first"][i]);
        if (j.contains("second_pair")) m.second_pair[i] = complex_from(j["second_pair"][i]);
        if (j.contains("first_err")) m.first_err[i] = j["first_err"][i].get<double>();
        if (j.contains("second_err")) m.second_err[i] = j["second_err"][i].get<double>();
    }
    if (j.contains("cov")) {
        m.cov.resize(7, 7);
        for (int r = 0; r < 7; ++r)
            for (int c = 0; c < 7; ++c) m.cov(r, c) = j["cov"][r][c].get<double>();
    }
    return m;
}

}  // namespace triphoton
