def sign(v):
    # choose sign
    if v > 0:
        return 1
    else:
        return -1
