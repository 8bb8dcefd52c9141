def normalize(key):
    return key.lower()
