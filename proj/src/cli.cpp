#include "lmrank/cli.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lmrank/catalog.hpp"
#include "lmrank/embeddings.hpp"
#include "lmrank/eval.hpp"
#include "lmrank/feature_ops.hpp"
#include "lmrank/manifest.hpp"
#include "lmrank/rerank.hpp"
#include "lmrank/retrieval.hpp"
#include "lmrank/sampler.hpp"
#include "lmrank/synth.hpp"

namespace lmrank {

namespace {

std::string ids_path_for(const std::string& emb_path, const std::string& explicit_path) {
    if (!explicit_path.empty()) {
        return explicit_path;
    }
    if (emb_path.size() > 4 && emb_path.ends_with(".emb")) {
        return emb_path.substr(0, emb_path.size() - 4) + ".ids";
    }
    return emb_path + ".ids";
}

EmbeddingMatrix load_normalized(const std::string& emb_path, const std::string& ids_path) {
    return normalize_rows(load_embeddings(emb_path, ids_path));
}

std::map<Continent, double> parse_prob_map(const std::vector<std::string>& entries,
                                           const std::map<Continent, double>& defaults) {
    if (entries.empty()) {
        return defaults;
    }
    std::map<Continent, double> probs;
    for (const std::string& entry : entries) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("expected NAME=PROB, got '" + entry + "'");
        }
        const Continent c = continent_from_string(entry.substr(0, eq));
        probs[c] = std::stod(entry.substr(eq + 1));
    }
    return probs;
}

std::vector<std::vector<double>> read_matrix_txt(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(path + ": cannot open file");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::vector<double> row;
        double v = 0.0;
        while (is >> v) {
            row.push_back(v);
        }
        if (!row.empty()) {
            rows.push_back(std::move(row));
        }
    }
    if (rows.empty()) {
        throw std::runtime_error(path + ": no numeric rows");
    }
    return rows;
}

nlohmann::json prob_map_json(const std::map<Continent, double>& probs) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [c, p] : probs) {
        j[to_string(c)] = p;
    }
    return j;
}

void print_vector(std::ostream& out, const std::vector<double>& v) {
    out << std::setprecision(9);
    for (std::size_t i = 0; i < v.size(); ++i) {
        out << (i == 0 ? "" : " ") << v[i];
    }
    out << '\n';
}

struct SynthArgs {
    std::string out_dir;
    SynthConfig cfg;
    std::vector<std::string> continent_dist;
};

struct SampleArgs {
    std::string catalog_path;
    std::string mapping_path;
    std::string strategy = "continent-aware";
    std::string out_path;
    SamplerConfig cfg;
    std::vector<std::string> continent_probs;
};

struct SearchArgs {
    std::string queries;
    std::string query_ids;
    std::string index;
    std::string index_ids;
    std::size_t k = 100;
    std::string out_path;
};

struct RerankArgs {
    std::string queries;
    std::string query_ids;
    std::string index;
    std::string index_ids;
    std::string train;
    std::string train_ids;
    std::string catalog_path;
    std::string mapping_path;
    std::string order = "kreciprocal_then_tags";
    RerankConfig cfg;
    std::string out_path;
};

struct EvaluateArgs {
    std::string pred_path;
    std::string gt_path;
};

struct StatsArgs {
    std::string catalog_path;
    std::string mapping_path;
};

struct GemArgs {
    double p = 3.0;
    std::string input;
};

struct ArcfaceArgs {
    std::string x_path;
    std::string weights_path;
    std::size_t target = 0;
    double scale = 30.0;
    double margin = 0.3;
    bool grad = false;
};

int run_synth(const SynthArgs& args, std::ostream& out) {
    SynthConfig cfg = args.cfg;
    cfg.continent_distribution = parse_prob_map(args.continent_dist, default_continent_probs());
    const SynthDataset data = generate_synthetic(cfg);
    write_synthetic(data, args.out_dir);

    nlohmann::json config = {
        {"landmarks", cfg.n_landmarks},
        {"train_per_landmark", cfg.train_per_landmark},
        {"index_per_landmark", cfg.index_per_landmark},
        {"query_per_landmark", cfg.query_per_landmark},
        {"dim", cfg.dim},
        {"sigma", cfg.noise_sigma},
        {"noisy_fraction", cfg.noisy_fraction},
        {"continent_distribution", prob_map_json(cfg.continent_distribution)},
    };
    write_manifest(make_manifest("synth", cfg.seed, {}, config),
                   args.out_dir + "/synth.manifest.json");
    out << "wrote synthetic dataset to " << args.out_dir << " ("
        << data.train.rows() << " train, " << data.index.rows() << " index, "
        << data.query.rows() << " query)\n";
    return 0;
}

int run_sample(const SampleArgs& args, std::ostream& out) {
    const Catalog catalog = load_catalog(args.catalog_path, args.mapping_path);
    SamplerConfig cfg = args.cfg;
    cfg.continent_probs = parse_prob_map(args.continent_probs, default_continent_probs());
    if (cfg.epoch_size == 0) {
        cfg.epoch_size = catalog.train_size();
    }

    EpochPlan plan;
    if (args.strategy == "id-uniform") {
        plan = sample_id_uniform(catalog, cfg);
    } else if (args.strategy == "softmax") {
        plan = sample_softmax(catalog, cfg);
    } else if (args.strategy == "continent-aware") {
        plan = sample_continent_aware(catalog, cfg);
    } else {
        throw CLI::ValidationError("--strategy", "unknown strategy '" + args.strategy + "'");
    }
    save_plan(plan, args.out_path);

    nlohmann::json config = {
        {"strategy", args.strategy},
        {"epoch_size", cfg.epoch_size},
        {"ids_per_batch", cfg.ids_per_batch},
        {"images_per_id", cfg.images_per_id},
        {"clean_prob", cfg.clean_prob},
        {"continent_probs", prob_map_json(cfg.continent_probs)},
    };
    write_manifest(make_manifest("sample", cfg.seed,
                                 {{"catalog", args.catalog_path}, {"mapping", args.mapping_path}},
                                 config),
                   args.out_path + ".manifest.json");
    out << "wrote plan with " << plan.image_ids.size() << " slots to " << args.out_path << '\n';
    return 0;
}

int run_search(const SearchArgs& args, unsigned threads, std::ostream& out) {
    const std::string query_ids = ids_path_for(args.queries, args.query_ids);
    const std::string index_ids = ids_path_for(args.index, args.index_ids);
    const EmbeddingMatrix queries = load_normalized(args.queries, query_ids);
    const EmbeddingMatrix index = load_normalized(args.index, index_ids);
    const std::vector<RankedList> results = search_topk(queries, index, args.k, threads);
    save_predictions(results, args.out_path);

    nlohmann::json config = {{"k", args.k}};
    write_manifest(make_manifest("search", 0,
                                 {{"queries", args.queries},
                                  {"query_ids", query_ids},
                                  {"index", args.index},
                                  {"index_ids", index_ids}},
                                 config),
                   args.out_path + ".manifest.json");
    out << "wrote " << results.size() << " ranked lists to " << args.out_path << '\n';
    return 0;
}

int run_rerank(const RerankArgs& args, unsigned threads, std::ostream& out) {
    RerankConfig cfg = args.cfg;
    cfg.order = pipeline_order_from_string(args.order);
    validate(cfg);

    const std::string query_ids = ids_path_for(args.queries, args.query_ids);
    const std::string index_ids = ids_path_for(args.index, args.index_ids);
    const std::string train_ids = ids_path_for(args.train, args.train_ids);
    const Catalog catalog = load_catalog(args.catalog_path, args.mapping_path);
    const EmbeddingMatrix queries = load_normalized(args.queries, query_ids);
    const EmbeddingMatrix index = load_normalized(args.index, index_ids);
    const EmbeddingMatrix train = load_normalized(args.train, train_ids);

    const std::vector<RankedList> results =
        rerank_pipeline(queries, index, train, catalog, cfg, threads);
    save_predictions(results, args.out_path);

    nlohmann::json config = {
        {"order", to_string(cfg.order)}, {"k_tag", cfg.k_tag},   {"alpha", cfg.alpha},
        {"beta", cfg.beta},              {"k1", cfg.k1},         {"k2", cfg.k2},
        {"lambda", cfg.lambda},          {"min_tag_sim", cfg.min_tag_sim},
    };
    write_manifest(make_manifest("rerank", 0,
                                 {{"queries", args.queries},
                                  {"query_ids", query_ids},
                                  {"index", args.index},
                                  {"index_ids", index_ids},
                                  {"train", args.train},
                                  {"train_ids", train_ids},
                                  {"catalog", args.catalog_path},
                                  {"mapping", args.mapping_path}},
                                 config),
                   args.out_path + ".manifest.json");
    out << "wrote " << results.size() << " reranked lists to " << args.out_path << '\n';
    return 0;
}

int run_evaluate(const EvaluateArgs& args, std::ostream& out) {
    const std::vector<RankedList> predictions = load_predictions(args.pred_path);
    const GroundTruth gt = load_ground_truth(args.gt_path);
    const double map = mean_ap_at_100(predictions, gt);
    out << "mAP@100 " << std::fixed << std::setprecision(6) << map << '\n';
    return 0;
}

int run_stats(const StatsArgs& args, std::ostream& out) {
    const Catalog catalog = load_catalog(args.catalog_path, args.mapping_path);
    const CatalogStats stats = split_stats(catalog);
    out << "split,samples,labels,clean,noisy";
    for (Continent c : kAllContinents) {
        out << ',' << to_string(c);
    }
    out << '\n';
    for (Split split : {Split::Train, Split::Index, Split::Query}) {
        const SplitStats& s = stats.of(split);
        out << to_string(split) << ',' << s.samples << ',' << s.distinct_labels << ','
            << s.clean << ',' << s.noisy;
        for (std::size_t c = 0; c < kContinentCount; ++c) {
            out << ',' << s.per_continent[c];
        }
        out << '\n';
    }
    return 0;
}

int run_gem(const GemArgs& args, std::ostream& out) {
    const std::vector<std::vector<double>> features = read_matrix_txt(args.input);
    print_vector(out, gem_pool(features, GemConfig{args.p}));
    return 0;
}

int run_arcface(const ArcfaceArgs& args, std::ostream& out) {
    const std::vector<std::vector<double>> x_rows = read_matrix_txt(args.x_path);
    if (x_rows.size() != 1) {
        throw std::runtime_error(args.x_path + ": expected exactly one row vector");
    }
    const std::vector<std::vector<double>> weights = read_matrix_txt(args.weights_path);
    const ArcfaceConfig cfg{args.scale, args.margin};
    out << "logits ";
    print_vector(out, arcface_logits(x_rows[0], weights, args.target, cfg));
    if (args.grad) {
        const ArcfaceLossGrad lg = arcface_loss_grad(x_rows[0], weights, args.target, cfg);
        out << "loss " << std::setprecision(12) << lg.loss << '\n';
        out << "grad ";
        print_vector(out, lg.grad_x);
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"batch landmark retrieval: sampling plans, search, reranking, scoring"};
    app.require_subcommand(1);
    app.set_config("--config")->description("key=value file; flags override it");

    unsigned threads = 1;
    app.add_option("--threads", threads, "worker threads for parallel stages")
        ->capture_default_str();

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--out", synth_args.out_dir, "output directory (must exist)")->required();
    synth->add_option("--landmarks", synth_args.cfg.n_landmarks)->capture_default_str();
    synth->add_option("--train-per-landmark", synth_args.cfg.train_per_landmark)
        ->capture_default_str();
    synth->add_option("--index-per-landmark", synth_args.cfg.index_per_landmark)
        ->capture_default_str();
    synth->add_option("--query-per-landmark", synth_args.cfg.query_per_landmark)
        ->capture_default_str();
    synth->add_option("--dim", synth_args.cfg.dim)->capture_default_str();
    synth->add_option("--sigma", synth_args.cfg.noise_sigma, "cluster noise before renormalizing")
        ->capture_default_str();
    synth->add_option("--noisy-fraction", synth_args.cfg.noisy_fraction,
                      "train fraction given wrong labels")
        ->capture_default_str();
    synth->add_option("--continent-dist", synth_args.continent_dist,
                      "NAME=PROB per continent (repeatable)");
    synth->add_option("--seed", synth_args.cfg.seed)->capture_default_str();

    SampleArgs sample_args;
    CLI::App* sample = app.add_subcommand("sample", "write an epoch sampling plan");
    sample->add_option("--catalog", sample_args.catalog_path)->required();
    sample->add_option("--mapping", sample_args.mapping_path)->required();
    sample->add_option("--strategy", sample_args.strategy,
                       "id-uniform | softmax | continent-aware")
        ->capture_default_str();
    sample->add_option("--out", sample_args.out_path)->required();
    sample->add_option("--epoch-size", sample_args.cfg.epoch_size, "0 = train split size")
        ->capture_default_str();
    sample->add_option("--p,--ids-per-batch", sample_args.cfg.ids_per_batch)
        ->capture_default_str();
    sample->add_option("--k,--images-per-id", sample_args.cfg.images_per_id)
        ->capture_default_str();
    sample->add_option("--clean-prob", sample_args.cfg.clean_prob)->capture_default_str();
    sample->add_option("--continent-prob", sample_args.continent_probs,
                       "NAME=PROB per continent (repeatable)");
    sample->add_option("--seed", sample_args.cfg.seed)->capture_default_str();

    SearchArgs search_args;
    CLI::App* search = app.add_subcommand("search", "exact cosine top-k search");
    search->add_option("--queries", search_args.queries, "query .emb file")->required();
    search->add_option("--query-ids", search_args.query_ids, "default: queries with .ids");
    search->add_option("--index", search_args.index, "index .emb file")->required();
    search->add_option("--index-ids", search_args.index_ids, "default: index with .ids");
    search->add_option("-k,--k", search_args.k)->capture_default_str();
    search->add_option("--out", search_args.out_path, "submission CSV")->required();

    RerankArgs rerank_args;
    CLI::App* rerank = app.add_subcommand("rerank", "k-reciprocal + tag-aware reranking");
    rerank->add_option("--queries", rerank_args.queries)->required();
    rerank->add_option("--query-ids", rerank_args.query_ids);
    rerank->add_option("--index", rerank_args.index)->required();
    rerank->add_option("--index-ids", rerank_args.index_ids);
    rerank->add_option("--train", rerank_args.train)->required();
    rerank->add_option("--train-ids", rerank_args.train_ids);
    rerank->add_option("--catalog", rerank_args.catalog_path)->required();
    rerank->add_option("--mapping", rerank_args.mapping_path)->required();
    rerank->add_option("--order", rerank_args.order,
                       "kreciprocal_then_tags | tags_only | kreciprocal_only")
        ->capture_default_str();
    rerank->add_option("--k-tag", rerank_args.cfg.k_tag)->capture_default_str();
    rerank->add_option("--alpha", rerank_args.cfg.alpha, "landmark tag weight")
        ->capture_default_str();
    rerank->add_option("--beta", rerank_args.cfg.beta, "country tag weight")
        ->capture_default_str();
    rerank->add_option("--k1", rerank_args.cfg.k1)->capture_default_str();
    rerank->add_option("--k2", rerank_args.cfg.k2)->capture_default_str();
    rerank->add_option("--lambda", rerank_args.cfg.lambda)->capture_default_str();
    rerank->add_option("--min-tag-sim", rerank_args.cfg.min_tag_sim,
                       "below this rank-1 similarity an index image gets no tags")
        ->capture_default_str();
    rerank->add_option("--out", rerank_args.out_path, "submission CSV")->required();

    EvaluateArgs evaluate_args;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score a submission against ground truth");
    evaluate->add_option("--pred", evaluate_args.pred_path)->required();
    evaluate->add_option("--gt", evaluate_args.gt_path)->required();

    StatsArgs stats_args;
    CLI::App* stats = app.add_subcommand("stats", "per-split catalog statistics");
    stats->add_option("--catalog", stats_args.catalog_path)->required();
    stats->add_option("--mapping", stats_args.mapping_path)->required();

    CLI::App* kernels = app.add_subcommand("kernels", "ad-hoc numeric kernel evaluation");
    kernels->require_subcommand(1);
    GemArgs gem_args;
    CLI::App* gem = kernels->add_subcommand("gem", "generalized mean pooling");
    gem->add_option("--p", gem_args.p)->capture_default_str();
    gem->add_option("--input", gem_args.input, "text file, one feature vector per line")
        ->required();
    ArcfaceArgs arcface_args;
    CLI::App* arcface = kernels->add_subcommand("arcface", "margin logits / loss / gradient");
    arcface->add_option("--x", arcface_args.x_path, "text file with one unit vector")->required();
    arcface->add_option("--weights", arcface_args.weights_path,
                        "text file, one unit class vector per line")
        ->required();
    arcface->add_option("--target", arcface_args.target)->required();
    arcface->add_option("--scale", arcface_args.scale)->capture_default_str();
    arcface->add_option("--margin", arcface_args.margin)->capture_default_str();
    arcface->add_flag("--grad", arcface_args.grad, "also print loss and gradient");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (synth->parsed()) {
            return run_synth(synth_args, out);
        }
        if (sample->parsed()) {
            return run_sample(sample_args, out);
        }
        if (search->parsed()) {
            return run_search(search_args, threads, out);
        }
        if (rerank->parsed()) {
            return run_rerank(rerank_args, threads, out);
        }
        if (evaluate->parsed()) {
            return run_evaluate(evaluate_args, out);
        }
        if (stats->parsed()) {
            return run_stats(stats_args, out);
        }
        if (kernels->parsed()) {
            if (gem->parsed()) {
                return run_gem(gem_args, out);
            }
            if (arcface->parsed()) {
                return run_arcface(arcface_args, out);
            }
        }
        err << "lmrank: error: no subcommand\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        err << "lmrank: error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "lmrank: error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace lmrank
