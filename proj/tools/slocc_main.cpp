// Command-line front end: classify, compare, catalog, selftest.
//
// Exit codes: 0 success / Equivalent, 1 Inequivalent, 2 parse error or
// unknown catalog system, 3 unstable rank decision, 4 undecided within
// budget, 5 dimension mismatch.
#include "slocc/slocc.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace slocc;

struct RunConfig {
    double tol = 1e-9;
    double cert_tol = 1e-8;
    int restarts = 0;  // 0 keeps the preset value
    int iters = 0;
    std::uint64_t seed = 0;
    std::string format = "human";
    std::string preset = "default";
};

SearchBudget make_budget(const RunConfig& cfg) {
    SearchBudget b;
    if (cfg.preset == "fast") {
        b.restarts = 16;
        b.max_iterations = 200;
    } else if (cfg.preset == "thorough") {
        b.restarts = 150;
        b.max_iterations = 2000;
    }
    if (cfg.restarts > 0) b.restarts = cfg.restarts;
    if (cfg.iters > 0) b.max_iterations = cfg.iters;
    b.seed = cfg.seed;
    b.accept_tol = cfg.cert_tol;
    return b;
}

StateTensor load_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_state(ss.str());
}

std::string fmt_complex(Complex z) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%+.6f%+.6fi", z.real(), z.imag());
    return buf;
}

std::string fmt_dims(const std::vector<int>& dims) {
    std::string s;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(dims[i]);
    }
    return s;
}

void print_matrix(std::ostream& os, const Matrix& m, const char* indent) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        os << indent << "[";
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << " " << fmt_complex(m(r, c));
        os << " ]\n";
    }
}

std::string genuine_rationale(const Classification& c) {
    if (c.genuine) return "true";
    if (!c.regime.ok) return "false (" + c.regime.why + ")";
    for (std::size_t k = 0; k < c.local_ranks.size(); ++k)
        if (c.local_ranks[k] < 2)
            return "false (party " + std::to_string(k + 1) + " has local rank 1)";
    return "false";
}

int run_classify(const std::string& path, const RunConfig& cfg) {
    StateTensor state = load_state_file(path);
    Classification cls = classify(state, cfg.tol);
    std::optional<int> cat = Catalog::instance().match(cls.label);
    if (cfg.format == "json") {
        Json doc = cls.to_json();
        if (cat)
            doc["catalog_id"] = *cat;
        else
            doc["catalog_id"] = nullptr;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "family:      " << cls.label.structure << "\n";
        std::string pt = cls.label.params_text();
        std::cout << "params:      " << (pt.empty() ? "-" : pt) << "\n";
        std::cout << "dims:        " << fmt_dims(cls.label.dims)
                  << (cls.label.transposed ? "  (pencil transposed)" : "") << "\n";
        std::cout << "effective:   " << cls.profile.effective_shape[0] << "x"
                  << cls.profile.effective_shape[1] << "\n";
        std::cout << "local ranks:";
        for (int r : cls.local_ranks) std::cout << " " << r;
        std::cout << "\n";
        std::cout << "genuine:     " << genuine_rationale(cls) << "\n";
        if (cat) {
            const CatalogEntry& e = Catalog::instance().representative(*cat);
            std::cout << "catalog:     id " << e.id << " (" << e.name << ", " << e.note << ")\n";
        } else {
            std::cout << "catalog:     -\n";
        }
        std::cout << "residual:    " << cls.canon.tf.residual << "\n";
    }
    return 0;
}

int run_compare(const std::string& path_a, const std::string& path_b, const RunConfig& cfg) {
    StateTensor a = load_state_file(path_a);
    StateTensor b = load_state_file(path_b);
    CompareOptions opts;
    opts.tol = cfg.tol;
    opts.cert_tol = cfg.cert_tol;
    opts.budget = make_budget(cfg);
    CompareResult res = compare(a, b, opts);
    if (cfg.format == "json") {
        std::cout << res.to_json().dump(2) << "\n";
    } else {
        std::cout << "verdict:  " << to_string(res.status) << "\n";
        std::cout << "reason:   " << res.reason << "\n";
        if (res.label_a)
            std::cout << "family A: " << res.label_a->structure << "  [" << res.label_a->params_text()
                      << "]\n";
        if (res.label_b)
            std::cout << "family B: " << res.label_b->structure << "  [" << res.label_b->params_text()
                      << "]\n";
        if (res.certificate) {
            std::cout << "residual: " << res.certificate->residual << "\n";
            std::cout << "operators (B = (O1 x ... x On) A):\n";
            for (std::size_t k = 0; k < res.certificate->ops.size(); ++k) {
                const Matrix& m = res.certificate->ops[k];
                std::cout << "  party " << (k + 1) << " (" << m.rows() << "x" << m.cols() << "):\n";
                print_matrix(std::cout, m, "    ");
            }
        }
    }
    switch (res.status) {
        case CompareStatus::Equivalent: return 0;
        case CompareStatus::Inequivalent: return 1;
        case CompareStatus::Undecided: return 4;
        case CompareStatus::DimsMismatch: return 5;
    }
    return 4;
}

// "2x2x3", "2×2×3", "223" all normalize to "223".
std::string normalize_system(const std::string& s) {
    std::string out;
    for (char c : s)
        if (c >= '0' && c <= '9') out += c;
    return out;
}

int run_catalog(const std::string& system, int rep_id, int census_samples, bool with_states,
                const RunConfig& cfg) {
    const Catalog& cat = Catalog::instance();
    std::string sys = normalize_system(system);
    static const std::vector<std::string> known = {"22222", "222", "223", "224", "233", "234", "244"};
    bool ok = false;
    for (const std::string& k : known) ok = ok || k == sys;
    if (!ok) {
        std::cerr << "catalog: unknown system '" << system << "'\n";
        return 2;
    }

    if (rep_id > 0) {
        const CatalogEntry& e = cat.representative(rep_id);  // throws on bad id
        if (cfg.format == "json") {
            std::cout << e.to_json(true).dump(2) << "\n";
        } else {
            std::cout << "id:        " << e.id << "\n";
            std::cout << "name:      " << e.name << "\n";
            std::cout << "source:    " << e.source_system << "\n";
            std::cout << "note:      " << e.note << "\n";
            std::cout << "structure: " << e.label.structure << "\n";
            std::string pt = e.label.params_text();
            std::cout << "params:    " << (pt.empty() ? "-" : pt) << "\n";
            std::cout << "state (nonzero amplitudes, 1-based indices):\n";
            const std::vector<int>& d = e.state.dims();
            std::vector<int> idx(d.size(), 0);
            for (long off = 0; off < e.state.size(); ++off) {
                Complex z = e.state.data()[off];
                if (std::abs(z) > 0) {
                    long rem = off;
                    for (int k = static_cast<int>(d.size()) - 1; k >= 0; --k) {
                        idx[k] = static_cast<int>(rem % d[k]) + 1;
                        rem /= d[k];
                    }
                    std::cout << "  |";
                    for (std::size_t k = 0; k < idx.size(); ++k) std::cout << idx[k];
                    std::cout << "> : " << fmt_complex(z) << "\n";
                }
            }
        }
        return 0;
    }

    if (census_samples > 0) {
        if (sys != "22222") {
            std::cerr << "catalog: census is defined for system 22222 only\n";
            return 2;
        }
        CensusReport rep = family_census({2, 2, 2, 2, 2}, census_samples, cfg.seed);
        if (cfg.format == "json") {
            std::cout << rep.to_json().dump(2) << "\n";
        } else {
            std::cout << "census over " << rep.samples << " random states (seed " << cfg.seed
                      << "):\n";
            for (std::size_t i = 0; i < rep.counts.size(); ++i)
                if (rep.counts[i] > 0)
                    std::cout << "  " << cat.entries()[i].name << ": " << rep.counts[i] << "\n";
            std::cout << "  unmatched: " << rep.unmatched << "  unstable: " << rep.unstable << "\n";
        }
        return 0;
    }

    // Listing, filtered by source system unless the full system is asked for.
    std::vector<const CatalogEntry*> rows;
    std::vector<std::pair<std::string, int>> split;
    for (const CatalogEntry& e : cat.entries()) {
        if (sys != "22222" && normalize_system(e.source_system) != sys) continue;
        rows.push_back(&e);
        bool found = false;
        for (auto& [src, n] : split)
            if (src == e.source_system) {
                ++n;
                found = true;
            }
        if (!found) split.emplace_back(e.source_system, 1);
    }
    if (cfg.format == "json") {
        Json doc;
        doc["system"] = sys;
        doc["count"] = rows.size();
        Json sp;
        for (const auto& [src, n] : split) sp[src] = n;
        doc["split"] = sp;
        Json arr = Json::array();
        for (const CatalogEntry* e : rows) arr.push_back(e->to_json(with_states));
        doc["entries"] = arr;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "catalog " << fmt_dims({2, 2, 2, 2, 2}) << ": " << rows.size()
                  << " families\n";
        for (const CatalogEntry* e : rows) {
            std::printf(" %2d  %-6s %-6s %s\n", e->id, e->name.c_str(), e->source_system.c_str(),
                        e->note.c_str());
        }
        std::cout << "split:";
        for (const auto& [src, n] : split) std::cout << " " << src << "=" << n;
        std::cout << "\n";
    }
    return 0;
}

struct SuiteResult {
    std::string name;
    int cases = 0;
    int failures = 0;
    double seconds = 0.0;
    std::vector<std::string> notes;
};

SuiteResult suite_pairwise(const RunConfig& cfg) {
    SuiteResult out;
    out.name = "pairwise-inequivalence";
    auto t0 = std::chrono::steady_clock::now();
    const Catalog& cat = Catalog::instance();
    CompareOptions opts;
    opts.tol = cfg.tol;
    opts.cert_tol = cfg.cert_tol;
    opts.budget = make_budget(cfg);
    for (const CatalogEntry& e : cat.entries()) {
        ++out.cases;
        Classification cls = classify(e.state, cfg.tol);
        if (!same_family(cls.label, e.label)) {
            ++out.failures;
            out.notes.push_back(e.name + ": stored label does not reproduce");
        }
    }
    const auto& es = cat.entries();
    for (std::size_t i = 0; i < es.size(); ++i) {
        for (std::size_t j = i + 1; j < es.size(); ++j) {
            ++out.cases;
            CompareResult r = compare(es[i].state, es[j].state, opts);
            if (r.status != CompareStatus::Inequivalent) {
                ++out.failures;
                out.notes.push_back(es[i].name + " vs " + es[j].name + ": " +
                                    to_string(r.status));
            }
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

SuiteResult suite_ilo(const RunConfig& cfg) {
    SuiteResult out;
    out.name = "ilo-invariance";
    auto t0 = std::chrono::steady_clock::now();
    const Catalog& cat = Catalog::instance();
    const int tuples = 5;
    for (int id = 1; id <= 16; ++id) {
        const CatalogEntry& e = cat.representative(id);
        for (int t = 0; t < tuples; ++t) {
            ++out.cases;
            LocalOperatorTuple ops =
                random_local_tuple(e.state.dims(), mix_seed(cfg.seed, 100u * id + t), 100.0);
            StateTensor image = apply_local_ops(e.state, ops);
            try {
                Classification cls = classify(image, cfg.tol);
                if (!same_family(cls.label, e.label)) {
                    ++out.failures;
                    out.notes.push_back(e.name + " tuple " + std::to_string(t) +
                                        ": label changed to " + cls.label.structure);
                }
            } catch (const RankDecisionUnstable& ex) {
                ++out.failures;
                out.notes.push_back(e.name + " tuple " + std::to_string(t) + ": " + ex.what());
            }
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

SuiteResult suite_realign(const RunConfig& cfg) {
    SuiteResult out;
    out.name = "realignment";
    auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::pair<int, int>> shapes = {{2, 2}, {2, 3}, {3, 3}, {2, 4}};
    auto gaussian_matrix = [](int r, int c, std::uint64_t seed) {
        Rng rng(seed);
        Matrix m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = Complex(rng.gaussian(), rng.gaussian());
        return m;
    };
    int case_id = 0;
    for (const auto& [p, q] : shapes) {
        for (int t = 0; t < 50; ++t) {
            ++out.cases;
            ++case_id;
            Matrix a = gaussian_matrix(p, p, mix_seed(cfg.seed, 0x3e1f0 + case_id));
            Matrix b = gaussian_matrix(q, q, mix_seed(cfg.seed, 0x3e1f1 + 31 * case_id));
            Matrix prod = kron(a, b);
            GroupShape g{p, q, p, q};
            try {
                KronFactors kf = kron_factor(prod, g, 1e-8);
                double err = (kron(kf.a, kf.b) - prod).norm() / prod.norm();
                if (err > 1e-10) {
                    ++out.failures;
                    out.notes.push_back("recovery error " + std::to_string(err));
                }
            } catch (const NotAProduct&) {
                ++out.failures;
                out.notes.push_back("exact product rejected");
            }
        }
    }
    // SWAP on two qubits is entangling, so it must be rejected.
    {
        ++out.cases;
        Matrix swap = Matrix::Zero(4, 4);
        swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = Complex(1, 0);
        try {
            kron_factor(swap, GroupShape{2, 2, 2, 2}, 1e-8);
            ++out.failures;
            out.notes.push_back("SWAP accepted as a product");
        } catch (const NotAProduct&) {
        }
    }
    for (int t = 0; t < 20; ++t) {
        Matrix m = random_invertible(4, mix_seed(cfg.seed, 0x90d + t), 100.0);
        RealignmentReport rep = realignment_report(m, GroupShape{2, 2, 2, 2});
        if (rep.sigma_ratio <= 1e-3) continue;  // too close to a product to count
        ++out.cases;
        try {
            kron_factor(m, GroupShape{2, 2, 2, 2}, 1e-8);
            ++out.failures;
            out.notes.push_back("random non-product accepted");
        } catch (const NotAProduct&) {
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

int run_selftest(const RunConfig& cfg) {
    std::vector<SuiteResult> suites;
    suites.push_back(suite_pairwise(cfg));
    suites.push_back(suite_ilo(cfg));
    suites.push_back(suite_realign(cfg));
    bool all_ok = true;
    if (cfg.format == "json") {
        Json doc;
        Json arr = Json::array();
        for (const SuiteResult& s : suites) {
            all_ok = all_ok && s.failures == 0;
            arr.push_back(Json{{"suite", s.name},
                               {"cases", s.cases},
                               {"failures", s.failures},
                               {"status", s.failures == 0 ? "pass" : "fail"},
                               {"notes", s.notes}});
        }
        doc["suites"] = arr;
        doc["ok"] = all_ok;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::printf("%-24s %7s %7s  %s\n", "suite", "cases", "failed", "status");
        for (const SuiteResult& s : suites) {
            all_ok = all_ok && s.failures == 0;
            std::printf("%-24s %7d %7d  %s  (%.2fs)\n", s.name.c_str(), s.cases, s.failures,
                        s.failures == 0 ? "pass" : "FAIL", s.seconds);
            for (const std::string& n : s.notes) std::cout << "    " << n << "\n";
        }
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SLOCC family classification for 2xLxMxNxH pure states"};
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env = std::getenv("SLOCC_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);

    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--tol", cfg.tol, "rank decision tolerance")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--cert-tol", cfg.cert_tol, "certificate residual bound")
            ->check(CLI::Range(0.0, 1.0));
        sub->add_option("--restarts", cfg.restarts, "search restarts (overrides preset)");
        sub->add_option("--iters", cfg.iters, "search iterations per restart (overrides preset)");
        sub->add_option("--seed", cfg.seed, "base seed (default: SLOCC_SEED or 0)");
        sub->add_option("--format", cfg.format, "output format")
            ->check(CLI::IsMember({"human", "json"}));
        sub->add_option("--budget-preset", cfg.preset, "search budget preset")
            ->check(CLI::IsMember({"fast", "default", "thorough"}));
    };

    std::string path_a, path_b, system = "22222";
    int rep_id = 0, census = 0;
    bool with_states = false;

    CLI::App* c_classify = app.add_subcommand("classify", "classify one state file");
    c_classify->add_option("state", path_a, "state JSON file")->required();
    add_common(c_classify);

    CLI::App* c_compare = app.add_subcommand("compare", "decide equivalence of two state files");
    c_compare->add_option("state_a", path_a, "state JSON file")->required();
    c_compare->add_option("state_b", path_b, "state JSON file")->required();
    add_common(c_compare);

    CLI::App* c_catalog = app.add_subcommand("catalog", "list or dump the family catalog");
    c_catalog->add_option("--system", system, "system, e.g. 22222 or 2x3x4");
    c_catalog->add_option("--id", rep_id, "dump one representative by id");
    c_catalog->add_option("--census", census, "classify this many random states");
    c_catalog->add_flag("--states", with_states, "include states in JSON listing");
    add_common(c_catalog);

    CLI::App* c_selftest = app.add_subcommand("selftest", "run the built-in verification suites");
    add_common(c_selftest);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_classify->parsed()) return run_classify(path_a, cfg);
        if (c_compare->parsed()) return run_compare(path_a, path_b, cfg);
        if (c_catalog->parsed()) return run_catalog(system, rep_id, census, with_states, cfg);
        if (c_selftest->parsed()) return run_selftest(cfg);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const RankDecisionUnstable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
