"""Smoke test for the pymodestab extension.

Build it first, e.g. `pip install -e crates/python --no-build-isolation`.
"""

import json
import math

import pymodestab as m


def main():
    rec = m.Recurrence()
    coeffs = rec.coefficients("0", 2)
    assert coeffs == ["1", "3/7", "2/9"], coeffs
    cls = rec.classify("2", 500)
    assert cls["class"] == "converges-to" and abs(cls["root"][0] - 1.0) < 1e-12, cls

    chain = m.transform_chain()
    assert chain["verified"], chain

    cert = m.certify()
    assert cert.verdict == "MODE_STABLE" and cert.is_stable()
    assert cert.recheck()["verdict"] == "MODE_STABLE"
    again = m.Certificate.from_json(cert.to_json())
    assert again.to_json() == cert.to_json()

    data = json.loads(cert.to_json())
    data["tasks"][1]["lines"][0]["leaves"][0]["margin"] = "1/7"
    try:
        m.Certificate.from_json(json.dumps(data)).recheck()
    except ValueError:
        pass
    else:
        raise AssertionError("tampered certificate accepted")

    weak = m.certify(m_eps="1/6")
    assert not weak.is_stable(), weak

    sh = m.Shooter()
    assert abs(sh.mismatch(1.0)) < 1e-8
    z = sh.refine(1.05 + 0.02j)
    assert abs(z - 1.0) < 1e-10, z
    rho, vals = sh.eigenfunction(1.0, 50)
    err = max(abs(v - r / (1 + r * r)) for r, v in zip(rho, vals))
    assert err < 1e-6, err

    box = sh.scan(0.8, 1.3, -0.2, 0.3)
    assert box["winding"] == 1 and len(box["zeros"]) == 1, box

    assert m.parse_hex_float(m.hex_float(math.pi)) == math.pi
    print("pymodestab", m.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
