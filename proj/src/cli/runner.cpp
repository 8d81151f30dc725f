#include "periodolil/cli/runner.hpp"

#include "periodolil/diagnostics/conditions.hpp"
#include "periodolil/diagnostics/markov.hpp"
#include "periodolil/diagnostics/martingale.hpp"
#include "periodolil/diagnostics/transfer.hpp"
#include "periodolil/transform.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>
#include <json.hpp>

namespace periodolil {

namespace fs = std::filesystem;

std::string config_hash(const ExperimentConfig& c) {
    std::istringstream in(render_config(c));
    std::string line, kept;
    while (std::getline(in, line)) {
        if (line.rfind("seed = ", 0) == 0 || line.rfind("dir = ", 0) == 0) continue;
        kept += line;
        kept += '\n';
    }
    return sha256_hex(kept);
}

std::optional<SpectralDensity> reference_density(const ProcessSpec& spec) {
    if (const auto* p = std::get_if<IidSpec>(&spec)) return make_linear_density(LinearSpec{{1.0}, p->innovation});
    if (const auto* p = std::get_if<LinearSpec>(&spec)) return make_linear_density(*p);
    if (const auto* p = std::get_if<ARLSpec>(&spec); p && p->delta == 0.0)
        return make_linear_density(LinearSpec{geometric_coeffs(1.0 - p->C), p->innovation});
    if (const auto* p = std::get_if<FunctionOfLinearSpec>(&spec); p && p->h == ScalarFunction::identity())
        return make_linear_density(p->base);
    return std::nullopt;
}

namespace {

// Collects output files in a staging directory with their checksums.
class Staging {
public:
    explicit Staging(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", (dir_ / name).string()));
        checksums_[name] = sha256_hex(content);
    }

    const std::map<std::string, std::string>& checksums() const { return checksums_; }

private:
    fs::path dir_;
    std::map<std::string, std::string> checksums_;
};

SeedSpec replicate_seed(const ExperimentConfig& c, std::uint64_t r) { return SeedSpec{c.master_seed, {r, StreamRole::process}}; }

std::vector<Frequency> sorted_frequencies(const ExperimentConfig& c) {
    auto ts = c.frequencies;
    std::sort(ts.begin(), ts.end(), [](const Frequency& a, const Frequency& b) { return a.radians() < b.radians(); });
    return ts;
}

std::string label_for(const Frequency& t) {
    std::string s = render_frequency(t);
    for (auto& ch : s)
        if (ch == '/' || ch == ' ') ch = '_';
    return s;
}

// ---------------------------------------------------------------------------
// Modes

void run_lil(const ExperimentConfig& c, Staging& out) {
    const auto ts = sorted_frequencies(c);
    const std::int64_t N = c.schedule.back();
    std::vector<std::string> chunks(c.replicates);
    parallel_for(c.replicates, [&](std::size_t r) {
        const auto w = generate(c.process, replicate_seed(c, r), N);
        std::string s;
        for (const auto& t : ts) {
            const auto tr = track_lil(w.values, t, c.schedule);
            for (const auto& row : tr.rows)
                s += fmt::format("{},{},{},{},{},{},{},{}\n", r, format_real(t.radians()), row.n,
                                 format_real(row.s.real()), format_real(row.s.imag()), format_real(row.periodogram),
                                 format_real(row.ratio), format_real(row.running_max));
        }
        chunks[r] = std::move(s);
    });
    std::string csv = "seed,t,n,re_S,im_S,periodogram,loglog_ratio,running_max\n";
    for (const auto& ch : chunks) csv += ch;
    out.write("lil.csv", csv);
}

void run_spectral(const ExperimentConfig& c, Staging& out) {
    const auto ts = sorted_frequencies(c);
    const std::int64_t m = c.half_width > 0 ? c.half_width : default_half_width(c.n);
    {
        const std::vector<double> zeros(static_cast<std::size_t>(c.n), 0.0);
        for (const auto& t : ts) {
            try {
                smoothed_periodogram_from_grid(zeros, t, m);
            } catch (const data_error& e) {
                throw config_error(fmt::format("frequency {}: {}", render_frequency(t), e.what()));
            }
        }
    }

    std::ostringstream density;
    density << "t,f,provenance,params_hash\n";
    if (const auto ref = reference_density(c.process)) {
        write_density_csv(density, *ref, ts, false);
        LinearSpec lin;
        if (const auto* p = std::get_if<LinearSpec>(&c.process)) lin = *p;
        else if (const auto* p = std::get_if<IidSpec>(&c.process)) lin = LinearSpec{{1.0}, p->innovation};
        else if (const auto* p = std::get_if<ARLSpec>(&c.process))
            lin = LinearSpec{geometric_coeffs(1.0 - p->C), p->innovation};
        else lin = std::get<FunctionOfLinearSpec>(c.process).base;
        write_density_csv(density, make_fejer_density(autocov_linear(lin, c.fejer_order), c.fejer_order), ts, false);
    }

    const std::size_t R = c.replicates;
    std::vector<std::vector<double>> smoothed(R), sigma(R);
    parallel_for(R, [&](std::size_t r) {
        const auto w = generate(c.process, replicate_seed(c, r), c.n);
        const auto S = dft_grid(w.values);
        std::vector<double> I(S.size());
        for (std::size_t j = 0; j < S.size(); ++j) I[j] = periodogram(S[j], c.n);
        for (const auto& t : ts) {
            smoothed[r].push_back(smoothed_periodogram_from_grid(I, t, m));
            sigma[r].push_back(std::norm(dft(w.values, t)) / static_cast<double>(c.n));
        }
    });
    const std::string hash = sha256_hex(fmt::format("smoothed;{};{};{};{};{}", render_process(c.process),
                                                    c.master_seed, c.n, m, R))
                                 .substr(0, 16);
    std::string sig = "t,sigma2,se,replicates,n\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        std::vector<double> sv(R), gv(R);
        for (std::size_t r = 0; r < R; ++r) {
            sv[r] = smoothed[r][i];
            gv[r] = sigma[r][i];
        }
        density << format_real(ts[i].radians()) << ',' << format_real(mean_and_se(sv).mean) << ','
                << to_string(DensityProvenance::smoothed_periodogram) << ',' << hash << '\n';
        const Estimate e = mean_and_se(gv);
        sig += fmt::format("{},{},{},{},{}\n", format_real(ts[i].radians()), format_real(e.mean), format_real(e.se), R,
                           c.n);
    }
    out.write("density.csv", density.str());
    if (R >= 30) out.write("sigma_t.csv", sig);
}

// Upper quantile function of |Z| under the grid measure h·dx: Q(u) = inf{x : P(|Z| > x) ≤ u}.
std::function<double(double)> grid_quantile(const GridFunction& h, const GridFunction& values) {
    std::vector<std::pair<double, double>> vw;
    const double dx = h.width();
    const double mass = h.integral();
    for (std::size_t i = 0; i < h.size(); ++i) vw.emplace_back(std::abs(values[i]), h[i] * dx / mass);
    std::sort(vw.begin(), vw.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> cum(vw.size()), val(vw.size());
    double s = 0.0;
    for (std::size_t i = 0; i < vw.size(); ++i) {
        s += vw[i].second;
        cum[i] = s;
        val[i] = vw[i].first;
    }
    return [cum = std::move(cum), val = std::move(val)](double u) {
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        if (it == cum.end()) return val.back();
        return val[static_cast<std::size_t>(it - cum.begin())];
    };
}

void run_conditions(const ExperimentConfig& c, Staging& out) {
    std::vector<ConditionReport> reports;
    const auto ts = sorted_frequencies(c);

    auto linear_conditions = [&](const LinearSpec& lin) {
        auto e0 = [&](std::int64_t k) { return e0_norm_linear(lin, k); };
        reports.push_back(series_condition(ConditionId::condFM2, e0, c.k_max));
        reports.push_back(series_condition(ConditionId::condFM, e0, c.k_max));
        reports.push_back(condproj_linear(lin));
        for (const auto& t : ts) {
            auto lil = series_condition(
                ConditionId::condLIL, [&](std::int64_t n) { return remainder_variance_linear(lin, t, n); }, c.k_max);
            lil.label = label_for(t);
            reports.push_back(std::move(lil));
            auto rz = rootzen_condition_linear(lin, t, c.k_max);
            rz.label = label_for(t);
            reports.push_back(std::move(rz));
        }
    };

    if (const auto* p = std::get_if<IidSpec>(&c.process)) {
        linear_conditions(LinearSpec{{1.0}, p->innovation});
    } else if (const auto* p = std::get_if<LinearSpec>(&c.process)) {
        linear_conditions(*p);
    } else if (const auto* p = std::get_if<FunctionOfLinearSpec>(&c.process)) {
        reports.push_back(corlin_condition(p->base, p->h.holder()->gamma, c.k_max));
        reports.push_back(condproj_linear(p->base));
    } else if (const auto* p = std::get_if<IntermittentSpec>(&c.process)) {
        const auto op = intermittent_operator(p->gamma, static_cast<std::size_t>(c.grid), static_cast<int>(c.iterations));
        const auto& h = op.density;
        const auto f = GridFunction::sample(h.size(), [&](double x) { return p->observable(x); });
        const double nu_f = (h * f).integral() / h.integral();
        // ‖E₀X_k‖² = ∫|L^k f − ν(f)|² dν for k = 1..k_max, pushing h·f once per lag
        std::vector<double> e0(static_cast<std::size_t>(c.k_max) + 1, 0.0);
        GridFunction g = h * f;
        for (std::int64_t k = 1; k <= c.k_max; ++k) {
            g = op.push(g);
            double s = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i) {
                const double Lk = h[i] > 0.0 ? g[i] / h[i] : 0.0;
                s += (Lk - nu_f) * (Lk - nu_f) * h[i];
            }
            e0[static_cast<std::size_t>(k)] = s * h.width() / h.integral();
        }
        auto src = [&](std::int64_t k) { return e0[static_cast<std::size_t>(k)]; };
        reports.push_back(series_condition(ConditionId::condFM2, src, c.k_max));
        reports.push_back(series_condition(ConditionId::condFM, src, c.k_max));

        std::vector<std::int64_t> lags(static_cast<std::size_t>(c.k_max));
        for (std::int64_t k = 1; k <= c.k_max; ++k) lags[static_cast<std::size_t>(k - 1)] = k;
        const auto alphas = alpha_coefficients(op, lags, 64);
        std::vector<double> alpha(alphas.size());
        for (std::size_t i = 0; i < alphas.size(); ++i) alpha[i] = alphas[i].value;
        GridFunction centred(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) centred[i] = f[i] - nu_f;
        reports.push_back(quantile_condition(grid_quantile(h, centred), alpha, c.k_max));
    } else {
        NestedBudget budget;
        budget.outer = 400;
        budget.inner_start = 64;
        budget.inner_max = 1024;
        std::function<cplx(double)> obs;
        if (const auto* p = std::get_if<MetropolisSpec>(&c.process)) {
            const auto g = p->observable;
            obs = [g](double x) { return cplx(g(x), 0.0); };
        } else {
            obs = [](double x) { return cplx(x, 0.0); };
        }
        for (const auto& t : ts) {
            auto rz = rootzen_condition_markov(c.process, obs, t, 64, budget,
                                               SeedSpec{c.master_seed, {0, StreamRole::inner_futures}});
            rz.label = label_for(t);
            reports.push_back(std::move(rz));
        }
    }

    std::ostringstream jsonl;
    for (const auto& r : reports) {
        write_condition_jsonl(jsonl, r);
        std::ostringstream terms;
        write_term_table_csv(terms, r);
        const std::string name = r.label.empty() ? fmt::format("terms_{}.csv", to_string(r.id))
                                                 : fmt::format("terms_{}_{}.csv", to_string(r.id), r.label);
        out.write(name, terms.str());
    }
    out.write("conditions.jsonl", jsonl.str());
}

void run_martingale(const ExperimentConfig& c, Staging& out) {
    const auto& spec = std::get<LinearSpec>(c.process);
    const auto ts = sorted_frequencies(c);
    std::vector<std::string> chunks(c.replicates);
    parallel_for(c.replicates, [&](std::size_t r) {
        const auto w = gen_linear(spec, replicate_seed(c, r), c.n);
        std::string s;
        for (const auto& t : ts) {
            const auto d = martingale_decompose_linear(spec, w, t, c.n);
            s += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r, format_real(t.radians()), c.n,
                             format_real(d.S_n.real()), format_real(d.S_n.imag()), format_real(d.M_n.real()),
                             format_real(d.M_n.imag()), format_real(d.R_n.real()), format_real(d.R_n.imag()),
                             format_real(d.R_n_projection.real()), format_real(d.R_n_projection.imag()));
        }
        chunks[r] = std::move(s);
    });
    std::string csv = "seed,t,n,re_S,im_S,re_M,im_M,re_R,im_R,re_R_proj,im_R_proj\n";
    for (const auto& ch : chunks) csv += ch;
    out.write("martingale.csv", csv);

    const auto grid = std::bit_ceil(static_cast<std::uint64_t>(2 * (c.n + spec.truncation_order())));
    const auto rep = partest_identity_check(spec, c.n, grid, c.replicates, replicate_seed(c, 0));
    std::string p = "n,grid,replicates,lhs,lhs_se,rhs,ratio,ratio_se\n";
    p += fmt::format("{},{},{},{},{},{},{},{}\n", rep.n, rep.grid, rep.replicates, format_real(rep.lhs.mean),
                     format_real(rep.lhs.se), format_real(rep.rhs), rep.ratio ? format_real(*rep.ratio) : "",
                     rep.ratio_se ? format_real(*rep.ratio_se) : "");
    out.write("partest.csv", p);
}

void run_transfer(const ExperimentConfig& c, Staging& out) {
    const auto& spec = std::get<IntermittentSpec>(c.process);
    const auto m = static_cast<std::size_t>(c.grid);
    const auto op = std::make_shared<IntermittentTransfer>(spec.gamma, m);
    const GridFunction h = invariant_density(*op, static_cast<int>(c.iterations));

    std::string dens = "x,h\n";
    for (std::size_t i = 0; i < m; ++i) dens += fmt::format("{},{}\n", format_real(h.midpoint(i)), format_real(h[i]));
    out.write("invariant_density.csv", dens);

    double defect = 0.0;
    for (const auto& f : {GridFunction(m, 1.0), GridFunction::sample(m, [](double x) { return x; }), h}) {
        const double a = f.integral();
        defect = std::max(defect, std::abs(op->apply(f).integral() - a) / std::abs(a));
    }
    const double slope = loglog_slope(h, 1e-4, 1e-2);

    GridMarkovOperator k;
    k.density = h;
    k.push = [op](const GridFunction& f) { return op->apply(f); };
    const auto alphas = alpha_coefficients(k, c.alpha_lags);
    std::string a = "k,alpha,coarse,u_at_max,inconclusive\n";
    for (const auto& r : alphas)
        a += fmt::format("{},{},{},{},{}\n", r.k, format_real(r.value), format_real(r.coarse), format_real(r.u_at_max),
                         r.inconclusive ? "true" : "false");
    out.write("alpha.csv", a);

    nlohmann::ordered_json j;
    j["gamma"] = spec.gamma;
    j["grid"] = c.grid;
    j["iterations"] = c.iterations;
    j["slope"] = slope;
    j["slope_window"] = {1e-4, 1e-2};
    j["conservation_defect"] = defect;
    out.write("transfer.jsonl", j.dump() + "\n");
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
    validate_config(config);
    if (fs::exists(out_dir) && !(fs::is_directory(out_dir) && fs::is_empty(out_dir)))
        throw config_error(fmt::format("output directory '{}' already exists and is not empty", out_dir.string()));

    const auto start = std::chrono::steady_clock::now();
    const fs::path parent = out_dir.has_parent_path() ? out_dir.parent_path() : fs::path(".");
    fs::create_directories(parent);
    const fs::path stage = parent / fmt::format(".{}.partial-{}", out_dir.filename().string(), ::getpid());
    fs::remove_all(stage);
    fs::create_directories(stage);

    RunManifest man;
    try {
        Staging out(stage);
        out.write("config.ini", render_config(config));
        switch (config.mode) {
            case Mode::lil: run_lil(config, out); break;
            case Mode::spectral: run_spectral(config, out); break;
            case Mode::conditions: run_conditions(config, out); break;
            case Mode::martingale: run_martingale(config, out); break;
            case Mode::transfer: run_transfer(config, out); break;
        }
        man.config_hash = config_hash(config);
        man.master_seed = config.master_seed;
        man.mode = to_string(config.mode);
        man.checksums = out.checksums();
        man.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        nlohmann::ordered_json head;
        head["config_hash"] = man.config_hash;
        head["tool_version"] = man.tool_version;
        head["master_seed"] = man.master_seed;
        head["mode"] = man.mode;
        head["wall_time"] = man.wall_time;
        std::string text = head.dump() + "\n";
        for (const auto& [name, sum] : man.checksums) {
            nlohmann::ordered_json line;
            line["file"] = name;
            line["sha256"] = sum;
            text += line.dump() + "\n";
        }
        std::ofstream mf(stage / "manifest.jsonl", std::ios::binary);
        mf << text;
        if (!mf) throw std::runtime_error("cannot write manifest");
        mf.close();

        if (fs::exists(out_dir)) fs::remove(out_dir);
        fs::rename(stage, out_dir);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(stage, ec);
        throw;
    }
    return man;
}

RunManifest read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "manifest.jsonl");
    if (!in) throw config_error(fmt::format("no manifest in '{}'", dir.string()));
    RunManifest man;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        if (first) {
            man.config_hash = j.at("config_hash").get<std::string>();
            man.tool_version = j.at("tool_version").get<std::string>();
            man.master_seed = j.at("master_seed").get<std::uint64_t>();
            man.mode = j.at("mode").get<std::string>();
            man.wall_time = j.at("wall_time").get<double>();
            first = false;
        } else {
            man.checksums[j.at("file").get<std::string>()] = j.at("sha256").get<std::string>();
        }
    }
    if (first) throw config_error(fmt::format("empty manifest in '{}'", dir.string()));
    return man;
}

namespace {

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) out.push_back(cur);
    return out;
}

}  // namespace

std::vector<SummaryRow> summarize_runs(const std::vector<fs::path>& dirs,
                                       const std::optional<SpectralDensity>& reference) {
    if (dirs.empty()) throw config_error("summarize needs at least one run directory");
    std::string hash;
    std::optional<ExperimentConfig> cfg;
    // frequency key (radians, 17 digits) → final running_max per (run, seed)
    std::map<std::string, std::map<std::pair<std::size_t, std::string>, std::pair<std::int64_t, double>>> finals;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        const auto man = read_manifest(dirs[d]);
        if (man.mode != "lil") throw config_error(fmt::format("'{}' is not a lil run", dirs[d].string()));
        if (hash.empty()) hash = man.config_hash;
        else if (hash != man.config_hash)
            throw config_error(fmt::format("'{}' was produced by a different config", dirs[d].string()));
        if (!cfg) cfg = load_config((dirs[d] / "config.ini").string());

        std::ifstream in(dirs[d] / "lil.csv");
        if (!in) throw config_error(fmt::format("no lil.csv in '{}'", dirs[d].string()));
        std::string line;
        std::getline(in, line);
        if (line != "seed,t,n,re_S,im_S,periodogram,loglog_ratio,running_max")
            throw data_error(fmt::format("unexpected lil.csv header in '{}'", dirs[d].string()));
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto f = split_csv(line);
            if (f.size() != 8) throw data_error("malformed lil.csv row: " + line);
            const std::int64_t n = std::stoll(f[2]);
            const double rm = parse_real(f[7]);
            auto& slot = finals[f[1]][{d, f[0]}];
            if (n >= slot.first) slot = {n, rm};
        }
    }

    std::vector<SummaryRow> rows;
    for (const auto& t : sorted_frequencies(*cfg)) {
        const auto it = finals.find(format_real(t.radians()));
        if (it == finals.end()) continue;
        std::vector<double> v;
        for (const auto& [key, val] : it->second) v.push_back(val.second);
        SummaryRow row;
        row.t = t;
        row.seeds = v.size();
        row.median = quantile(v, 0.5);
        row.q10 = quantile(v, 0.1);
        row.q90 = quantile(v, 0.9);
        row.min = *std::min_element(v.begin(), v.end());
        row.max = *std::max_element(v.begin(), v.end());
        if (reference) {
            const double f = (*reference)(t);
            row.reference = t.is_pi() ? 2.0 * f : f;
            if (*row.reference > 0.0) row.ratio = row.median / *row.reference;
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<SummaryRow> summarize_runs(const std::vector<fs::path>& dirs) {
    if (dirs.empty()) throw config_error("summarize needs at least one run directory");
    const auto cfg = load_config((dirs.front() / "config.ini").string());
    return summarize_runs(dirs, reference_density(cfg.process));
}

std::string render_summary(const std::vector<SummaryRow>& rows) {
    std::string s = "t,seeds,median,q10,q90,min,max,reference,ratio\n";
    for (const auto& r : rows)
        s += fmt::format("{},{},{},{},{},{},{},{},{}\n", render_frequency(r.t), r.seeds, format_real(r.median),
                         format_real(r.q10), format_real(r.q90), format_real(r.min), format_real(r.max),
                         r.reference ? format_real(*r.reference) : "", r.ratio ? format_real(*r.ratio) : "");
    return s;
}

}  // namespace periodolil
