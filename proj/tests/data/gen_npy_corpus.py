# Copyright 2026 The FGQ Authors
# SPDX-License-Identifier: Apache-2.0
#
# Regenerates npy_corpus.inc from the tests/ directory: python3 data/gen_npy_corpus.py
import io, numpy as np
from numpy.lib import format as F
rng = np.random.default_rng(7)
cases = []
def add(name, arr, version=None, expect="ok"):
    buf = io.BytesIO()
    if version is None:
        np.save(buf, arr)
    else:
        F.write_array(buf, arr, version=version)
    cases.append((name, buf.getvalue(), arr, expect))
add("f4_2x4x3x3_iota", np.arange(72, dtype='<f4').reshape(2,4,3,3))
add("f8_1x1x1x1", np.array([2.0]).reshape(1,1,1,1))
add("f4_3x2x1x1_random", rng.standard_normal((3,2,1,1)).astype('<f4'))
add("f8_2x3x2x2_random", rng.standard_normal((2,3,2,2)))
add("f4_10x1x1x1_neg", -np.arange(10, dtype='<f4').reshape(10,1,1,1))
add("f4_1x6x1x1_v2", np.linspace(-1,1,6).astype('<f4').reshape(1,6,1,1), version=(2,0))
add("f8_4x1x3x3_v3", rng.uniform(-1,1,(4,1,3,3)), version=(3,0))
add("f4_c_h_w_3d", np.arange(12, dtype='<f4').reshape(3,2,2), expect="rank")
add("f4_fortran", np.asfortranarray(np.arange(24, dtype='<f4').reshape(2,3,2,2)), expect="layout")
add("i4_int", np.arange(4, dtype='<i4').reshape(1,4,1,1), expect="layout")
add("f4_bigendian", np.arange(4, dtype='>f4').reshape(1,4,1,1), expect="layout")
add("f4_0x3x1x1_empty", np.zeros((0,3,1,1), dtype='<f4'))
add("f4_nan", np.array([1.0, np.nan], dtype='<f4').reshape(1,2,1,1), expect="data")
add("f4_100x1x1x1", rng.standard_normal((100,1,1,1)).astype("<f4"))
with open("data/npy_corpus.inc", "w") as out:
    out.write("// Generated with numpy %s (np.save / numpy.lib.format.write_array).\n" % np.__version__)
    out.write("// name, expectation, dtype, shape, bytes\n")
    for name, b, arr, expect in cases:
        dt = {"<f4":"f4", "<f8":"f8"}.get(arr.dtype.str, arr.dtype.str)
        shape = ",".join(str(s) for s in arr.shape)
        hexs = ",".join("0x%02x" % x for x in b)
        out.write('{"%s", "%s", "%s", {%s}, {%s}},\n' % (name, expect, dt, shape, hexs))
print(len(cases))
