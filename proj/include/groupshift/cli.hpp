#pragma once

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <iostream>

#include "groupshift/entropy.hpp"
#include "groupshift/json_io.hpp"

namespace groupshift::cli {

inline std::string fmt9(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

struct GlobalOptions {
    int jobs = 1;
    bool timings = false;
    Budget budget;

    Budget make_budget() const {
        Budget b = budget;
        b.jobs = jobs;
        return b;
    }
};

// --- validate ---------------------------------------------------------------

inline std::string sniff_type(const Json& doc) {
    if (doc.contains("type")) return doc["type"].get<std::string>();
    if (doc.contains("entries")) return "coding";
    if (doc.contains("construct")) return "sft";
    if (doc.contains("h_generators")) return "chart";
    if (doc.contains("tileset")) return "tiling";
    if (doc.contains("tiles")) return "tileset";
    if (doc.contains("alphabet") && doc.contains("group")) return "sft";
    if (doc.contains("patterns")) return "patterns";
    if (doc.contains("cells")) return "support";
    if (doc.contains("oracle")) return "group";
    return "unknown";
}

inline int cmd_validate(const std::vector<std::string>& paths, const GlobalOptions& opts) {
    Workspace ws;
    for (const auto& p : paths) ws.load_file(p);
    bool failed = false;
    for (const auto& [name, doc] : ws.documents()) {
        std::string type = sniff_type(doc);
        try {
            if (type == "group") {
                Group g = ws.group(doc);
                g.ball(1, opts.make_budget());
                std::cout << "ok group " << name << "\n";
            } else if (type == "sft") {
                SftSpec x = ws.sft(doc);
                std::cout << "ok sft " << name << " alphabet=" << x.alphabet.size()
                          << " forbidden=" << x.forbidden.size() << " rules=" << x.rules.size()
                          << "\n";
            } else if (type == "chart") {
                Chart ch = ws.chart(doc);
                // table totality on the locally admissible window patterns
                auto window_patterns = locally_admissible(ch.sft, ch.cocycle.window);
                for (const Pattern& p : window_patterns) {
                    for (std::size_t gen = 0; gen < ch.cocycle.table.size(); ++gen) {
                        if (!ch.cocycle.table[gen].count(p.symbols)) {
                            throw spec_error("cocycle table is missing generator \"" +
                                             ch.cocycle.h_generators[gen] + "\" on an admissible window pattern");
                        }
                    }
                }
                std::cout << "ok chart " << name << "\n";
            } else if (type == "tileset") {
                ws.tileset(doc);
                std::cout << "ok tileset " << name << "\n";
            } else if (type == "tiling") {
                ws.exact_tiling(doc);
                std::cout << "ok tiling " << name << "\n";
            } else if (type == "support") {
                ws.support(doc);
                std::cout << "ok support " << name << "\n";
            } else if (type == "coding") {
                Group g = ws.group(ws.resolve(doc).at("group"));
                Alphabet a(ws.resolve(doc).at("alphabet").get<std::vector<std::string>>());
                PatternCoding c = parse_coding(a, doc);
                ResolvedCoding r = resolve_coding(g, c);
                if (!r.consistent) {
                    std::cout << "warning coding " << name << " is inconsistent:\n";
                    for (const auto& clash : r.clashes) std::cout << "  " << clash << "\n";
                } else {
                    std::cout << "ok coding " << name << "\n";
                }
            } else if (type == "patterns") {
                std::cout << "ok patterns " << name << "\n";
            } else {
                throw spec_error("unrecognized document type");
            }
        } catch (const error& e) {
            std::cout << "error " << name << ": " << e.what() << "\n";
            failed = true;
        }
    }
    return failed ? 2 : 0;
}

// --- entry point ------------------------------------------------------------

inline int dispatch(int argc, char** argv) {
    CLI::App app{"subshifts of finite type over finitely generated groups"};
    app.require_subcommand(1);
    GlobalOptions opts;
    if (const char* env = std::getenv("GROUPSHIFT_BUDGET_NODES")) {
        opts.budget.nodes = std::strtoull(env, nullptr, 10);
    }
    app.add_option("--jobs", opts.jobs, "worker threads (outputs are identical for any value)");
    app.add_flag("--timings", opts.timings, "include wall-clock milliseconds in reports");
    app.add_option("--budget-nodes", opts.budget.nodes,
                   "search node budget; exceeding it exits with code 3");
    app.add_option("--budget-ball", opts.budget.ball_elements, "canonical ball element budget");

    int exit_code = 0;

    // validate
    std::vector<std::string> validate_paths;
    auto* validate = app.add_subcommand("validate", "parse and check documents");
    validate->add_option("paths", validate_paths, "JSON documents")->required();
    validate->callback([&]() { exit_code = cmd_validate(validate_paths, opts); });

    // sft count / sft tiling
    auto* sft_cmd = app.add_subcommand("sft", "SFT constructions and counting");
    sft_cmd->require_subcommand(1);
    {
        auto* count = sft_cmd->add_subcommand("count", "count locally admissible window patterns");
        auto sft_path = std::make_shared<std::string>();
        auto window_path = std::make_shared<std::string>();
        auto print_patterns = std::make_shared<bool>(false);
        count->add_option("--sft", *sft_path)->required();
        count->add_option("--window", *window_path)->required();
        count->add_flag("--print-patterns", *print_patterns);
        count->callback([&, sft_path, window_path, print_patterns]() {
            Workspace ws;
            std::string sft_name = ws.load_file(*sft_path);
            std::string window_name = ws.load_file(*window_path);
            SftSpec x = ws.sft(Json(sft_name));
            Support w = ws.support(Json(window_name));
            EnumerationOptions eopts;
            eopts.budget = opts.make_budget();
            std::cout << count_locally_admissible(x, w, eopts).to_string() << "\n";
            if (*print_patterns) {
                for (const Pattern& p : locally_admissible(x, w, eopts)) {
                    std::string line;
                    for (std::size_t i = 0; i < p.symbols.size(); ++i) {
                        if (i) line += " ";
                        line += x.alphabet.name(p.symbols[i]);
                    }
                    std::cout << line << "\n";
                }
            }
        });

        auto* tiling = sft_cmd->add_subcommand("tiling", "build the tiling SFT of a tile set");
        auto tiles_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        tiling->add_option("--tiles", *tiles_path)->required();
        tiling->add_option("-o,--output", *out_path);
        tiling->callback([&, tiles_path, out_path]() {
            Workspace ws;
            std::string tiles_name = ws.load_file(*tiles_path);
            auto [ts, g] = ws.tileset(Json(tiles_name));
            SftSpec x = tiling_sft(g, ts);
            Json doc = emit_sft(x);
            if (out_path->empty()) {
                std::cout << doc.dump(2) << "\n";
            } else {
                write_json_file(*out_path, doc);
                std::cout << "wrote " << *out_path << " forbidden=" << x.forbidden.size() << "\n";
            }
        });
    }

    // entropy estimate / exact-z / strip-bound
    auto* entropy_cmd = app.add_subcommand("entropy", "entropy bounds and exact values");
    entropy_cmd->require_subcommand(1);
    {
        auto* est = entropy_cmd->add_subcommand("estimate", "monotone upper-bound estimator");
        auto sft_path = std::make_shared<std::string>();
        auto n_max = std::make_shared<int>(4);
        auto family_spec = std::make_shared<std::string>("default");
        auto csv_path = std::make_shared<std::string>();
        auto bits = std::make_shared<bool>(false);
        est->add_option("--sft", *sft_path)->required();
        est->add_option("--n-max", *n_max)->required();
        est->add_option("--family", *family_spec,
                        "default | sub-balls | capped:<k> | windows:<file>");
        est->add_option("--csv", *csv_path);
        est->add_flag("--bits", *bits, "also print values in bits");
        est->callback([&, sft_path, n_max, family_spec, csv_path, bits]() {
            Workspace ws;
            std::string sft_name = ws.load_file(*sft_path);
            SftSpec x = ws.sft(Json(sft_name));
            SubsetFamily family;
            if (*family_spec == "default" || family_spec->empty()) {
                family = SubsetFamily{};
            } else if (*family_spec == "sub-balls") {
                family = SubsetFamily::sub_balls();
            } else if (family_spec->rfind("capped:", 0) == 0) {
                family = SubsetFamily{};
                family.subset_size_cap = std::stoi(family_spec->substr(7));
            } else if (family_spec->rfind("windows:", 0) == 0) {
                Workspace wws;
                wws.load_file(family_spec->substr(8));
                std::vector<Support> windows;
                for (const auto& [nm, doc] : wws.documents()) {
                    if (doc.contains("windows")) {
                        for (const Json& w : doc["windows"]) {
                            Json sup;
                            sup["group"] = doc.at("group");
                            sup["cells"] = w;
                            windows.push_back(wws.support(sup));
                        }
                    } else {
                        windows.push_back(wws.support(doc));
                    }
                }
                family = SubsetFamily::for_windows(std::move(windows));
            } else {
                throw spec_error("unknown family spec: " + *family_spec);
            }
            EstimateOptions eopts;
            eopts.budget = opts.make_budget();
            EntropyTrace trace = estimate(x, *n_max, family, eopts);
            std::string csv = "n,ball,family,h_n_num,h_n_den,raw,ms\n";
            for (const TraceRow& row : trace.rows) {
                long long den = 1ll << row.n;
                std::string h_text = row.empty_local_language ? std::string("empty")
                                     : row.no_window          ? std::string("none")
                                     : std::to_string(row.h_num) + "/" + std::to_string(den) +
                                               " = " + fmt9(row.h_value());
                std::cout << "n " << row.n << " ball " << row.ball_size << " family "
                          << row.family_size << " h " << h_text << " raw " << fmt9(row.raw_bound);
                if (*bits) std::cout << " h_bits " << fmt9(row.h_value() / std::log(2.0));
                if (opts.timings) std::cout << " ms " << static_cast<long long>(row.elapsed_ms);
                std::cout << "\n";
                csv += std::to_string(row.n) + "," + std::to_string(row.ball_size) + "," +
                       std::to_string(row.family_size) + "," + std::to_string(row.h_num) + "," +
                       std::to_string(den) + "," + fmt9(row.raw_bound) + "," +
                       (opts.timings ? std::to_string(static_cast<long long>(row.elapsed_ms))
                                     : std::string("0")) +
                       "\n";
            }
            if (!csv_path->empty()) {
                std::ofstream out(*csv_path);
                if (!out) throw spec_error("cannot write " + *csv_path);
                out << csv;
            }
        });

        auto* exact = entropy_cmd->add_subcommand("exact-z", "exact entropy of a Z-SFT");
        auto sft_path2 = std::make_shared<std::string>();
        auto memory = std::make_shared<int>(1);
        exact->add_option("--sft", *sft_path2)->required();
        exact->add_option("--memory", *memory)->required();
        exact->callback([&, sft_path2, memory]() {
            Workspace ws;
            std::string sft_name = ws.load_file(*sft_path2);
            SftSpec x = ws.sft(Json(sft_name));
            EstimateOptions eopts;
            eopts.budget = opts.make_budget();
            ExactZResult r = exact_z(x, *memory, eopts);
            std::cout << fmt9(r.entropy) << "\n";
            std::cout << "lambda " << fmt9(r.lambda) << "\n";
            std::cout << "states " << r.states << "\n";
            std::cout << "degenerate " << (r.degenerate ? "yes" : "no") << "\n";
        });

        auto* strip = entropy_cmd->add_subcommand("strip-bound", "periodic strip lower bound (Z^2)");
        auto sft_path3 = std::make_shared<std::string>();
        auto width = std::make_shared<int>(2);
        strip->add_option("--sft", *sft_path3)->required();
        strip->add_option("--width", *width)->required();
        strip->callback([&, sft_path3, width]() {
            Workspace ws;
            std::string sft_name = ws.load_file(*sft_path3);
            SftSpec x = ws.sft(Json(sft_name));
            EstimateOptions eopts;
            eopts.budget = opts.make_budget();
            StripBoundResult r = strip_lower_bound(x, *width, eopts);
            std::cout << fmt9(r.bound) << "\n";
            std::cout << "lambda " << fmt9(r.lambda) << "\n";
            std::cout << "states " << r.states << "\n";
        });
    }

    // chart embed / check-cocycle / freeness
    auto* chart_cmd = app.add_subcommand("chart", "cocycles, charts, embeddings");
    chart_cmd->require_subcommand(1);
    {
        auto* emb = chart_cmd->add_subcommand("embed", "embed an H-SFT through a chart");
        auto y_path = std::make_shared<std::string>();
        auto chart_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        emb->add_option("--y", *y_path)->required();
        emb->add_option("--chart", *chart_path)->required();
        emb->add_option("-o,--output", *out_path);
        emb->callback([&, y_path, chart_path, out_path]() {
            Workspace ws;
            std::string y_name = ws.load_file(*y_path);
            std::string chart_name = ws.load_file(*chart_path);
            SftSpec y = ws.sft(Json(y_name));
            Chart ch = ws.chart(Json(chart_name));
            EmbedResult r = embed(y, ch);
            Json doc = emit_sft(r.sft);
            if (out_path->empty()) {
                std::cout << doc.dump(2) << "\n";
            } else {
                write_json_file(*out_path, doc);
                std::cout << "wrote " << *out_path << " x_lifts=" << r.x_lift_count
                          << " transports=" << r.transport_count << "\n";
            }
        });

        auto* check = chart_cmd->add_subcommand("check-cocycle", "inverse-consistency spot check");
        auto chart_path2 = std::make_shared<std::string>();
        auto radius = std::make_shared<int>(1);
        check->add_option("--chart", *chart_path2)->required();
        check->add_option("--radius", *radius);
        check->callback([&, chart_path2, radius]() {
            Workspace ws;
            std::string chart_name = ws.load_file(*chart_path2);
            Chart ch = ws.chart(Json(chart_name));
            EnumerationOptions eopts;
            eopts.budget = opts.make_budget();
            CocycleCheckReport r = check_cocycle(ch, *radius, eopts);
            std::cout << "patterns " << r.patterns_scanned << "\n";
            std::cout << "checks " << r.checks << "\n";
            std::cout << "violations " << r.violations.size() << "\n";
            for (const auto& v : r.violations) std::cout << "  " << v << "\n";
            if (!r.ok()) exit_code = 2;
        });

        auto* freeness = chart_cmd->add_subcommand("freeness", "finite freeness spot check");
        auto chart_path3 = std::make_shared<std::string>();
        auto radius2 = std::make_shared<int>(2);
        auto words = std::make_shared<int>(4);
        auto h_group_path = std::make_shared<std::string>();
        freeness->add_option("--chart", *chart_path3)->required();
        freeness->add_option("--radius", *radius2);
        freeness->add_option("--words", *words);
        freeness->add_option("--h-group", *h_group_path);
        freeness->callback([&, chart_path3, radius2, words, h_group_path]() {
            Workspace ws;
            std::string chart_name = ws.load_file(*chart_path3);
            Chart ch = ws.chart(Json(chart_name));
            std::optional<Group> h;
            if (!h_group_path->empty()) {
                std::string h_name = ws.load_file(*h_group_path);
                h = ws.group(Json(h_name));
            }
            EnumerationOptions eopts;
            eopts.budget = opts.make_budget();
            FreenessReport r =
                freeness_check(ch, *radius2, *words, h ? &*h : nullptr, nullptr, eopts);
            std::cout << "patterns " << r.patterns_scanned << "\n";
            std::cout << "violations " << r.violations.size() << (r.exhausted ? "" : " (stopped early)")
                      << "\n";
            for (const auto& v : r.violations) {
                std::cout << "  word \"" << v.word << "\" base \""
                          << ch.sft.group.to_string(v.base) << "\"\n";
            }
            std::cout << "note: no violation up to (radius " << r.radius << ", length "
                      << r.word_length << ") is not a proof of freeness\n";
        });
    }

    // reduce core / language / overlay
    auto* reduce_cmd = app.add_subcommand("reduce", "K-cores and entropy reduction");
    reduce_cmd->require_subcommand(1);
    {
        auto* core_cmd = reduce_cmd->add_subcommand("core", "K-core of a finite set");
        auto t_path = std::make_shared<std::string>();
        auto k_path = std::make_shared<std::string>();
        core_cmd->add_option("--T", *t_path)->required();
        core_cmd->add_option("--K", *k_path)->required();
        core_cmd->callback([&, t_path, k_path]() {
            Workspace ws;
            std::string t_name = ws.load_file(*t_path);
            std::string k_name = ws.load_file(*k_path);
            Json t_doc = ws.document(t_name);
            Group g = ws.group(t_doc.at("group"));
            Support t = ws.support(t_doc);
            Support k = ws.support(Json(k_name));
            Support c = core(t, k, g);
            std::cout << emit_support(g, c).dump(2) << "\n";
        });

        auto* lang = reduce_cmd->add_subcommand("language", "restrict a window to a sample language");
        auto sft_path = std::make_shared<std::string>();
        auto window_path = std::make_shared<std::string>();
        auto sample_path = std::make_shared<std::string>();
        auto out_path = std::make_shared<std::string>();
        auto as_rule = std::make_shared<bool>(false);
        lang->add_option("--sft", *sft_path)->required();
        lang->add_option("--window", *window_path)->required();
        lang->add_option("--sample", *sample_path)->required();
        lang->add_option("-o,--output", *out_path);
        lang->add_flag("--as-rule", *as_rule, "emit a constructor recipe instead of literal patterns");
        lang->callback([&, sft_path, window_path, sample_path, out_path, as_rule]() {
            Workspace ws;
            std::string sft_name = ws.load_file(*sft_path);
            std::string window_name = ws.load_file(*window_path);
            std::string sample_name = ws.load_file(*sample_path);
            SftSpec x = ws.sft(Json(sft_name));
            Support d = ws.support(Json(window_name));
            auto sample = ws.pattern_list(Json(sample_name), x.group, x.alphabet);
            Json doc;
            if (*as_rule) {
                doc["construct"] = Json{{"kind", "language"},
                                        {"sft", ws.document(sft_name)},
                                        {"window", ws.document(window_name)},
                                        {"sample", ws.document(sample_name)},
                                        {"as_rule", true}};
            } else {
                SftSpec z = entropy_reducing_sft(x, d, sample, false);
                doc = emit_sft(z);
            }
            if (out_path->empty()) {
                std::cout << doc.dump(2) << "\n";
            } else {
                write_json_file(*out_path, doc);
                std::cout << "wrote " << *out_path << "\n";
            }
        });

        auto* overlay = reduce_cmd->add_subcommand("overlay", "core-address overlay construction");
        auto x_path = std::make_shared<std::string>();
        auto tiles_path = std::make_shared<std::string>();
        auto tiling_path = std::make_shared<std::string>();
        auto k2_path = std::make_shared<std::string>();
        auto out_path2 = std::make_shared<std::string>();
        auto fm_path = std::make_shared<std::string>();
        auto fm_limit = std::make_shared<int>(4096);
        auto lang_window = std::make_shared<std::string>();
        overlay->add_option("--sft", *x_path)->required();
        overlay->add_option("--tiles", *tiles_path)->required();
        overlay->add_option("--tiling", *tiling_path)
            ->description("exact tiling document; its orbit language constrains the tau layer");
        overlay->add_option("--language-window", *lang_window,
                            "support document for the tau-layer language restriction");
        overlay->add_option("--K", *k2_path)->required();
        overlay->add_option("-o,--output", *out_path2)->required();
        overlay->add_option("--factor-map", *fm_path, "serialize eta rows to this file");
        overlay->add_option("--factor-map-limit", *fm_limit);
        overlay->callback([&, x_path, tiles_path, tiling_path, k2_path, out_path2, fm_path, fm_limit,
                           lang_window]() {
            Workspace ws;
            std::string x_name = ws.load_file(*x_path);
            std::string tiles_name = ws.load_file(*tiles_path);
            std::string k_name = ws.load_file(*k2_path);
            SftSpec x = ws.sft(Json(x_name));
            auto [ts, g] = ws.tileset(Json(tiles_name));
            Support k = ws.support(Json(k_name));
            SftSpec constraints = tiling_sft(g, ts);
            Json constraints_recipe =
                Json{{"kind", "tiling"}, {"tiles", ws.document(tiles_name)}};
            if (!tiling_path->empty() && !lang_window->empty()) {
                std::string tau_name = ws.load_file(*tiling_path);
                std::string lw_name = ws.load_file(*lang_window);
                ExactTiling tau = ws.exact_tiling(Json(tau_name));
                Support d = ws.support(Json(lw_name));
                auto sample = tau.orbit_language(d);
                constraints = entropy_reducing_sft(constraints, d, sample, /*as_rule=*/true);
                Json sample_doc;
                Json plist = Json::array();
                for (const Pattern& p : sample) {
                    plist.push_back(emit_pattern(g, constraints.alphabet, p));
                }
                sample_doc["patterns"] = std::move(plist);
                constraints_recipe =
                    Json{{"kind", "language"},
                         {"sft", Json{{"construct", constraints_recipe}}},
                         {"window", ws.document(lw_name)},
                         {"sample", sample_doc},
                         {"as_rule", true}};
            }
            OverlayResult r = overlay_sft(x, ts, constraints, k);
            Json doc;
            doc["construct"] = Json{{"kind", "overlay"},
                                    {"sft", ws.document(x_name)},
                                    {"tiles", ws.document(tiles_name)},
                                    {"tiling", Json{{"construct", constraints_recipe}}},
                                    {"K", ws.document(k_name)}};
            write_json_file(*out_path2, doc);
            std::cout << "wrote " << *out_path2 << " alphabet=" << r.sft.alphabet.size()
                      << " rules=" << r.sft.rules.size() << "\n";
            if (!fm_path->empty()) {
                Json rows = Json::array();
                int emitted = 0;
                for (std::size_t tile = 0; tile < ts.size() && emitted < *fm_limit; ++tile) {
                    Support boundary = r.factor_map.boundary_of(static_cast<int>(tile));
                    EnumerationOptions eopts;
                    eopts.budget = opts.make_budget();
                    for (const Pattern& bp : locally_admissible(x, boundary, eopts)) {
                        if (emitted >= *fm_limit) break;
                        Json row;
                        row["tile"] = tile;
                        row["boundary"] = emit_pattern(g, x.alphabet, bp);
                        row["completion"] =
                            emit_pattern(g, x.alphabet, r.factor_map.eta(static_cast<int>(tile), bp));
                        rows.push_back(std::move(row));
                        ++emitted;
                    }
                }
                Json fm;
                fm["rows"] = std::move(rows);
                write_json_file(*fm_path, fm);
                std::cout << "wrote " << *fm_path << " rows=" << emitted << "\n";
            }
        });
    }

    // oracle: serve a group's word problem over the line protocol
    {
        auto* oracle = app.add_subcommand("oracle", "serve the word problem on stdin/stdout");
        auto group_path = std::make_shared<std::string>();
        oracle->add_option("--group", *group_path)->required();
        oracle->callback([&, group_path]() {
            Workspace ws;
            std::string group_name = ws.load_file(*group_path);
            Group g = ws.group(Json(group_name));
            std::string line;
            while (std::getline(std::cin, line)) {
                bool accept = false;
                try {
                    accept = g.wp_decide(line);
                } catch (const error&) {
                    accept = false;
                }
                std::cout << (accept ? "1" : "0") << std::endl;
            }
        });
    }

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}

inline int run(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const resource_limit_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 3;
    } catch (const non_convergence_error& e) {
        std::cerr << "numeric nonconvergence: " << e.what() << "\n";
        return 4;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace groupshift::cli
