package com.fixture.alpha;

import javax.crypto.Cipher;

public class Crypto {
    public Cipher vault() throws Exception {
        return Cipher.getInstance("AES");
    }
}
