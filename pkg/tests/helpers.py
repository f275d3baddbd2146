import numpy as np


def edf_field(value, width):
    return str(value).encode("ascii").ljust(width, b" ")


def hand_edf(labels, spr, records, dig_min=-32768, dig_max=32767, phys_min=-200, phys_max=200, duration=1):
    """EDF bytes assembled field by field, independent of the library writer.

    ``records`` is a list (one entry per record) of per-signal int lists.
    """
    ns = len(labels)
    head = b"".join([
        edf_field(0, 8), edf_field("patient", 80), edf_field("rec", 80),
        edf_field("01.02.03", 8), edf_field("04.05.06", 8), edf_field(256 + 256 * ns, 8),
        edf_field("", 44), edf_field(len(records), 8), edf_field(duration, 8), edf_field(ns, 4),
    ])
    columns = [
        [lab.encode("ascii").ljust(16, b" ") for lab in labels],
        [edf_field("AgAgCl", 80)] * ns,
        [edf_field("uV", 8)] * ns,
        [edf_field(phys_min, 8)] * ns,
        [edf_field(phys_max, 8)] * ns,
        [edf_field(dig_min, 8)] * ns,
        [edf_field(dig_max, 8)] * ns,
        [edf_field("HP:0.1Hz", 80)] * ns,
        [edf_field(spr, 8)] * ns,
        [edf_field("", 32)] * ns,
    ]
    head += b"".join(b"".join(col) for col in columns)
    body = b"".join(
        np.asarray(sig, dtype="<i2").tobytes() for record in records for sig in record
    )
    return head + body
