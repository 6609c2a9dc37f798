"""
Timing the two ADMD implementations
===================================

The direct version averages every neighbour cell separately.  The fast
one computes one box mean and takes a sparse dilation, so its cost
barely grows with the number of directions.  Image size matches a
288 x 5600 infrared strip.
"""

from admd.bench import default_bench_image, run_bench

img = default_bench_image(seed=0)
report = run_bench([("admd", (3, 5, 7, 9)), ("admd-eff", (3, 5, 7, 9)),
                    ("aagd", 7), ("admd-eff", 7), ("tophat", 7)],
                   img, reps=3, warmup=1)
print(report.to_table())

naive = report.find("admd").mean_ms
fast = report.find("admd-eff", "3,5,7,9").mean_ms
print(f"speedup of the efficient form: {naive / fast:.1f}x")
