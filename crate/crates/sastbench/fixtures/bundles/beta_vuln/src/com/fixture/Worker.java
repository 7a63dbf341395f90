package com.fixture.beta;

import android.content.Context;
import android.database.Cursor;
import android.database.sqlite.SQLiteDatabase;
import android.util.Log;
import android.webkit.WebView;
import javax.crypto.Cipher;

public class Worker {
    void persist(Context ctx, String name, byte[] payload) throws Exception {
        ctx.openFileOutput(name, 1).write(payload);
    }

    Cursor lookup(SQLiteDatabase db, String user) {
        return db.rawQuery("SELECT * FROM accounts WHERE owner = '" + user + "'", null);
    }

    Cipher cipher() throws Exception {
        return Cipher.getInstance("AES/ECB/PKCS5Padding");
    }

    void browse(WebView view) {
        view.getSettings().setAllowFileAccess(true);
    }

    void report(Exception e) {
        Log.e("beta", e.getMessage());
    }
}
